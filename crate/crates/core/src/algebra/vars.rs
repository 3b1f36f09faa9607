//! Variable identities and naming contexts.

use std::fmt;

/// Upper bound on distinct variables in one context.
pub const MAX_VARS: usize = 24;

/// Index of a variable inside a [`VarTable`]; also its slot in a monomial.
///
/// Lower index means "larger" in the term order, so with the phase-space
/// table `x > y > z > p_x > p_y > p_z > parameters`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u8);

impl VarId {
    pub const X: VarId = VarId(0);
    pub const Y: VarId = VarId(1);
    pub const Z: VarId = VarId(2);
    pub const PX: VarId = VarId(3);
    pub const PY: VarId = VarId(4);
    pub const PZ: VarId = VarId(5);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// The coordinates paired with their conjugate momenta.
    pub const CANONICAL_PAIRS: [(VarId, VarId); 3] =
        [(VarId::X, VarId::PX), (VarId::Y, VarId::PY), (VarId::Z, VarId::PZ)];

    pub const PHASE_SPACE: [VarId; 6] = [
        VarId::X,
        VarId::Y,
        VarId::Z,
        VarId::PX,
        VarId::PY,
        VarId::PZ,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Coordinate,
    Momentum,
    Parameter,
    /// Formal symbol standing for a named integral (only in generator space).
    Generator,
}

/// Ordered list of variable names with their kinds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarTable {
    names: Vec<String>,
    kinds: Vec<VarKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VarError {
    #[error("too many variables (limit {MAX_VARS})")]
    TooMany,
    #[error("duplicate variable name `{0}`")]
    Duplicate(String),
}

impl VarTable {
    pub const PHASE_NAMES: [&'static str; 6] = ["x", "y", "z", "p_x", "p_y", "p_z"];

    /// Phase-space table `x, y, z, p_x, p_y, p_z` followed by `params`.
    pub fn phase_space<S: AsRef<str>>(params: &[S]) -> Result<Self, VarError> {
        let mut t = VarTable {
            names: Vec::new(),
            kinds: Vec::new(),
        };
        for (k, n) in Self::PHASE_NAMES.iter().enumerate() {
            let kind = if k < 3 {
                VarKind::Coordinate
            } else {
                VarKind::Momentum
            };
            t.push(n, kind)?;
        }
        for p in params {
            t.push(p.as_ref(), VarKind::Parameter)?;
        }
        Ok(t)
    }

    /// Generator-space table: formal generator symbols, then parameters.
    pub fn generator_space<S: AsRef<str>, T: AsRef<str>>(
        generators: &[S],
        params: &[T],
    ) -> Result<Self, VarError> {
        let mut t = VarTable {
            names: Vec::new(),
            kinds: Vec::new(),
        };
        for g in generators {
            t.push(g.as_ref(), VarKind::Generator)?;
        }
        for p in params {
            t.push(p.as_ref(), VarKind::Parameter)?;
        }
        Ok(t)
    }

    fn push(&mut self, name: &str, kind: VarKind) -> Result<VarId, VarError> {
        if self.names.len() >= MAX_VARS {
            return Err(VarError::TooMany);
        }
        if self.names.iter().any(|n| n == name) {
            return Err(VarError::Duplicate(name.to_string()));
        }
        self.names.push(name.to_string());
        self.kinds.push(kind);
        Ok(VarId((self.names.len() - 1) as u8))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| VarId(k as u8))
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.index()]
    }

    pub fn kind(&self, v: VarId) -> VarKind {
        self.kinds[v.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.names.len()).map(|k| VarId(k as u8))
    }

    pub fn ids_of_kind(&self, kind: VarKind) -> impl Iterator<Item = VarId> + '_ {
        self.ids().filter(move |v| self.kind(*v) == kind)
    }

    pub fn parameters(&self) -> Vec<VarId> {
        self.ids_of_kind(VarKind::Parameter).collect()
    }

    pub fn parameter_names(&self) -> Vec<&str> {
        self.parameters().into_iter().map(|v| self.name(v)).collect()
    }
}

impl fmt::Display for VarTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.names.join(", "))
    }
}
