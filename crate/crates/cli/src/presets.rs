pub const PRESETS: &[(&str, &str)] = &[
    ("type1_full_rank", include_str!("../presets/type1_full_rank.json")),
    (
        "type1_rank_deficient",
        include_str!("../presets/type1_rank_deficient.json"),
    ),
    ("rate_ratio3", include_str!("../presets/rate_ratio3.json")),
    ("rate_ratio9", include_str!("../presets/rate_ratio9.json")),
    ("momentum_type1", include_str!("../presets/momentum_type1.json")),
    ("momentum_type2", include_str!("../presets/momentum_type2.json")),
    ("consensus_cycle", include_str!("../presets/consensus_cycle.json")),
];

pub fn find(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use rbkvs::experiments::ExperimentSpec;

    use super::*;

    #[test]
    fn every_preset_parses_validates_and_is_named_after_itself() {
        for (name, text) in PRESETS {
            let spec = ExperimentSpec::from_json(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(spec.name, *name);
            assert!(spec.problems().is_empty(), "{name}: {:?}", spec.problems());
        }
    }

    #[test]
    fn lookup_accepts_file_suffix() {
        assert!(find("type1_full_rank.json").is_some());
        assert!(find("nope").is_none());
    }
}
