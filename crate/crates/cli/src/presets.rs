//! Built-in configurations for the standard experiments.

pub const NAMES: &[&str] = &[
    "baseline",
    "table3_row1",
    "table3_row2",
    "table3_row3",
    "table3_row4",
    "table3_row5",
    "energy_loss",
    "direction_sweep",
    "constant_modulus",
];

pub fn preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "baseline" => include_str!("../presets/baseline.toml"),
        "table3_row1" => include_str!("../presets/table3_row1.toml"),
        "table3_row2" => include_str!("../presets/table3_row2.toml"),
        "table3_row3" => include_str!("../presets/table3_row3.toml"),
        "table3_row4" => include_str!("../presets/table3_row4.toml"),
        "table3_row5" => include_str!("../presets/table3_row5.toml"),
        "energy_loss" => include_str!("../presets/energy_loss.toml"),
        "direction_sweep" => include_str!("../presets/direction_sweep.toml"),
        "constant_modulus" => include_str!("../presets/constant_modulus.toml"),
        _ => return None,
    })
}
