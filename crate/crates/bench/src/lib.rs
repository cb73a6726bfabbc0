//! Benchmark fixtures shared by the criterion targets.

use graphscale_core::{presets, DrivenSystem};

/// Systems exercised by the benches, keyed by config name.
pub fn fixtures() -> Vec<(&'static str, DrivenSystem)> {
    vec![
        ("pc42", presets::pc42()),
        ("t3", presets::t3()),
        (
            "baker-r2.2",
            presets::baker_system(0.45, 2.2).expect("valid baker system"),
        ),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_build() {
        assert_eq!(super::fixtures().len(), 3);
    }
}
