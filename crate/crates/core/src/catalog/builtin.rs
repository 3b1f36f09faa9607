//! The seven built-in systems.

use super::error::CatalogError;
use super::parser::parse_system;
use super::system::SystemDefinition;

pub const BUILTIN_NAMES: [&str; 7] = ["V_I", "V_II", "V_III", "V_v", "V_iv", "V_vi", "V_vii"];

fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "V_I" => include_str!("systems/v_i.sys"),
        "V_II" => include_str!("systems/v_ii.sys"),
        "V_III" => include_str!("systems/v_iii.sys"),
        "V_v" => include_str!("systems/v_v.sys"),
        "V_iv" => include_str!("systems/v_iv.sys"),
        "V_vi" => include_str!("systems/v_vi.sys"),
        "V_vii" => include_str!("systems/v_vii.sys"),
        _ => return None,
    })
}

/// Source text of a built-in system.
pub fn builtin_source(name: &str) -> Result<&'static str, CatalogError> {
    source(name).ok_or_else(|| CatalogError::UnknownSystem(name.to_string()))
}

/// Parse a built-in system by name.
pub fn builtin_system(name: &str) -> Result<SystemDefinition, CatalogError> {
    parse_system(builtin_source(name)?)
}
