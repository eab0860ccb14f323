//! Bundled experiment configurations, one per reproduced result.

pub const RECIPES: [(&str, &str); 5] = [
    (
        "theorem1_uniform",
        include_str!("../recipes/theorem1_uniform.conf"),
    ),
    (
        "theorem3_inverse",
        include_str!("../recipes/theorem3_inverse.conf"),
    ),
    ("theorem4_msb", include_str!("../recipes/theorem4_msb.conf")),
    (
        "theorem6_revenue",
        include_str!("../recipes/theorem6_revenue.conf"),
    ),
    (
        "theoremB_ratio",
        include_str!("../recipes/theoremB_ratio.conf"),
    ),
];

pub fn recipe(name: &str) -> Option<&'static str> {
    RECIPES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn every_recipe_parses_and_validates() {
        for (name, text) in RECIPES {
            let specs = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            for spec in specs {
                assert_eq!(spec.seed, 42, "{name}");
                spec.validated().unwrap_or_else(|e| panic!("{name}: {e}"));
            }
        }
    }

    #[test]
    fn lookup() {
        assert!(recipe("theorem3_inverse").unwrap().contains("inverse"));
        assert!(recipe("nope").is_none());
    }
}
