//! Shipped experiment configurations.

use super::config::{parse_config_with, Overrides, RunConfig};
use crate::error::{LabError, Result};

#[derive(Debug)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "table1",
        summary: "diffusive scaling, fixed s_J = 3/2, lattice vs heat scheme",
        text: include_str!("../../presets/table1.cfg"),
    },
    Preset {
        name: "table2",
        summary: "acoustic scaling, kappa = 1/18, lattice vs heat scheme",
        text: include_str!("../../presets/table2.cfg"),
    },
    Preset {
        name: "table3",
        summary: "acoustic scaling, kappa = 1/18, lattice vs staggered damped acoustics",
        text: include_str!("../../presets/table3.cfg"),
    },
    Preset {
        name: "table4-k015",
        summary: "Gaussian, kappa = 0.15, lattice vs staggered damped acoustics to t = 2",
        text: include_str!("../../presets/table4-k015.cfg"),
    },
    Preset {
        name: "table4-k0015",
        summary: "Gaussian, kappa = 0.015, lattice vs staggered damped acoustics to t = 2",
        text: include_str!("../../presets/table4-k0015.cfg"),
    },
    Preset {
        name: "wave-nonprop",
        summary: "plane wave k = (3, 4), kappa = 1/18 (overdamped), lattice vs exact solution",
        text: include_str!("../../presets/wave-nonprop.cfg"),
    },
    Preset {
        name: "wave-prop",
        summary: "plane wave k = (3, 4), kappa = 17/288 (propagative), lattice vs exact solution",
        text: include_str!("../../presets/wave-prop.cfg"),
    },
];

pub fn find_preset(name: &str) -> Result<&'static Preset> {
    let stem = name.strip_suffix(".cfg").unwrap_or(name);
    PRESETS.iter().find(|p| p.name == stem).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        LabError::Domain(format!(
            "unknown preset `{name}` (known: {})",
            known.join(", ")
        ))
    })
}

pub fn load_preset(name: &str, overrides: &Overrides) -> Result<RunConfig> {
    parse_config_with(find_preset(name)?.text, overrides)
}
