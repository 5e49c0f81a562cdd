use super::{ConfigError, FuelCellConfig};

const PRESETS: &[(&str, &str)] = &[("EH-31", include_str!("../../presets/EH-31.cfg"))];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// Shipped settings text of a preset.
pub fn preset_text(name: &str) -> Result<&'static str, ConfigError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
}

pub fn preset(name: &str) -> Result<FuelCellConfig, ConfigError> {
    FuelCellConfig::parse(preset_text(name)?)
}
