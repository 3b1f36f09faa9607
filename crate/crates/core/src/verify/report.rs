//! Whole-system verification.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::catalog::SystemDefinition;

use super::{
    check_functional_independence, check_linear_independence, commutation_table, conservation,
    verify_relations, verify_special_structure, verify_structure_claims, CommutationTable, ConservationReport,
    LinearReport, RankReport, RelationKind, RelationVerdict, Session, Status, StructureOutcome, VerifyOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Section {
    Conservation,
    Commutation,
    Structures,
    Special,
    Relations,
    Independence,
}

impl Section {
    pub const ALL: [Section; 6] = [
        Section::Conservation,
        Section::Commutation,
        Section::Structures,
        Section::Special,
        Section::Relations,
        Section::Independence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Section::Conservation => "conservation",
            Section::Commutation => "commutation",
            Section::Structures => "structures",
            Section::Special => "special",
            Section::Relations => "relations",
            Section::Independence => "independence",
        }
    }
}

impl std::str::FromStr for Section {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Section::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown section `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub total: usize,
    pub verified: usize,
    pub verified_under_convention: usize,
    pub probable: usize,
    pub refuted: usize,
    pub errors: usize,
    pub skipped: usize,
}

impl Counts {
    fn add(&mut self, s: Status) {
        self.total += 1;
        match s {
            Status::Verified => self.verified += 1,
            Status::VerifiedUnderConvention => self.verified_under_convention += 1,
            Status::Probable => self.probable += 1,
            Status::Refuted => self.refuted += 1,
            Status::Error => self.errors += 1,
            Status::Skipped => self.skipped += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndependenceSummary {
    /// Jacobian rank of every generator but the last.
    pub core: Option<RankReport>,
    /// Jacobian rank of all generators.
    pub all: Option<RankReport>,
    pub linear: Option<LinearReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemReport {
    pub system: String,
    pub engine_version: String,
    pub fingerprint: String,
    pub seed: u64,
    pub mode: String,
    /// Fast-mode parameter values.
    pub parameter_values: Option<Vec<String>>,
    pub convention: String,
    pub conservation: Option<ConservationReport>,
    pub commutation: Option<CommutationTable>,
    pub commutation_error: Option<String>,
    pub structures: Vec<StructureOutcome>,
    pub special: Vec<RelationVerdict>,
    pub relations: Vec<RelationVerdict>,
    pub counts: BTreeMap<String, Counts>,
    pub independence: Option<IndependenceSummary>,
    /// Some check was skipped because the deadline passed.
    pub partial: bool,
}

fn kind_name(k: RelationKind) -> &'static str {
    match k {
        RelationKind::Closure => "closure",
        RelationKind::SecondAlgebra => "second-algebra",
        RelationKind::Linear => "linear",
        RelationKind::Structure => "structure",
        RelationKind::Special => "special",
    }
}

impl SystemReport {
    fn verdicts(&self) -> impl Iterator<Item = &RelationVerdict> {
        self.structures
            .iter()
            .map(|s| &s.verdict)
            .chain(&self.special)
            .chain(&self.relations)
    }

    /// Every requested check holds under the validating convention.
    pub fn all_hold(&self) -> bool {
        let conserved = self.conservation.as_ref().is_none_or(|c| c.all_conserved());
        let table = self.commutation.as_ref().is_none_or(|t| t.missing.is_empty()) && self.commutation_error.is_none();
        conserved && table && self.verdicts().all(|v| v.status.holds())
    }

    /// Some identity only holds under a convention other than the chosen one.
    pub fn used_alternate_convention(&self) -> bool {
        self.verdicts().any(|v| v.status == Status::VerifiedUnderConvention)
    }

    pub fn refuted(&self) -> impl Iterator<Item = &RelationVerdict> {
        self.verdicts().filter(|v| v.status == Status::Refuted)
    }
}

/// Run the requested sections. The convention is fixed first by the
/// conservation search unless the options force one.
pub fn verify_system(sys: &SystemDefinition, options: VerifyOptions, sections: &[Section]) -> SystemReport {
    let mut session = Session::new(sys, options);
    let want = |s: Section| sections.contains(&s);
    let cons = conservation(&session);
    if let Some(c) = cons.validating() {
        session.set_convention(c);
    }
    let session = session;
    let commutation = want(Section::Commutation).then(|| commutation_table(&session));
    let (commutation, commutation_error) = match commutation {
        Some(Ok(t)) => (Some(t), None),
        Some(Err(e)) => (None, Some(e.to_string())),
        None => (None, None),
    };
    let structures = if want(Section::Structures) {
        verify_structure_claims(&session)
    } else {
        Vec::new()
    };
    let special = if want(Section::Special) {
        verify_special_structure(&session)
    } else {
        Vec::new()
    };
    let relations = if want(Section::Relations) {
        verify_relations(&session)
    } else {
        Vec::new()
    };
    let independence = want(Section::Independence).then(|| independence(&session));

    let mut counts: BTreeMap<String, Counts> = BTreeMap::new();
    let all = structures.iter().map(|s| &s.verdict).chain(&special).chain(&relations);
    let mut partial = false;
    for v in all {
        counts.entry(kind_name(v.kind).to_string()).or_default().add(v.status);
        partial |= v.status == Status::Skipped;
    }
    SystemReport {
        system: sys.name.clone(),
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        fingerprint: super::fingerprint(&sys.serialize()),
        seed: session.options.seed,
        mode: if session.is_fast() { "fast" } else { "exact" }.to_string(),
        parameter_values: session
            .parameter_values()
            .map(|v| v.iter().map(|c| c.to_string()).collect()),
        convention: session.convention().to_string(),
        conservation: want(Section::Conservation).then_some(cons),
        commutation,
        commutation_error,
        structures,
        special,
        relations,
        counts,
        independence,
        partial,
    }
}

fn independence(session: &Session<'_>) -> IndependenceSummary {
    let names: Vec<String> = session.sys.generators.iter().map(|g| g.name.clone()).collect();
    let core = &names[..names.len().saturating_sub(1)];
    let mut out = IndependenceSummary {
        core: None,
        all: None,
        linear: None,
        error: None,
    };
    let run = || -> Result<_, super::VerifyError> {
        Ok((
            check_functional_independence(session, core)?,
            check_functional_independence(session, &names)?,
            check_linear_independence(session, &names)?,
        ))
    };
    match run() {
        Ok((c, a, l)) => {
            out.core = Some(c);
            out.all = Some(a);
            out.linear = Some(l);
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}
