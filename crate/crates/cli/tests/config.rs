use growfrag::Profile;
use growfrag_cli::config::Format;
use growfrag_cli::RunConfig;
use proptest::prelude::*;

fn profile() -> impl Strategy<Value = Profile> {
    prop_oneof![
        (-2.0..2.0f64, 0.05..1.0f64, 0.1..5.0f64).prop_map(|(mu, s, m)| Profile::log_gaussian(mu, s, m).unwrap()),
        (-5.0..-0.1f64, 0.0..1.0f64, 0.1..3.0f64).prop_map(|(a, b, h)| Profile::log_heaviside(a, b, h).unwrap()),
    ]
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        (1.1..5.0f64, 0.0..2.0f64, 0.1..3.0f64, profile()),
        (proptest::option::of(-80.0..-20.0f64), 8usize..128, 1.0..100.0f64, 0.001..0.5f64),
        proptest::option::of(proptest::collection::vec(-3.0..-0.1f64, 1..4)),
        (proptest::collection::vec(0.1..10.0f64, 1..4), 0.001..0.5f64, any::<bool>()),
    )
        .prop_map(|((alpha, g, b, profile), (y_min, m, t_end, dt), rays, (ct, tol, svg))| RunConfig {
            alpha,
            g,
            b,
            profile,
            y_min,
            m,
            t_end,
            dt,
            rays,
            compare_t: ct,
            checks: growfrag_cli::config::Checks {
                asymp_tol: tol,
                ..Default::default()
            },
            formats: if svg { vec![Format::Csv, Format::Svg] } else { vec![Format::Csv] },
            ..RunConfig::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn display_then_parse_is_identity(cfg in config()) {
        let text = cfg.to_string();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn set_overrides_single_field(t_end in 0.0..500.0f64) {
        let mut cfg = RunConfig::default();
        cfg.set("time.t_end", &t_end.to_string()).unwrap();
        prop_assert_eq!(cfg.t_end, t_end);
        prop_assert_eq!(cfg.m, RunConfig::default().m);
    }
}

#[test]
fn defaults_parse_from_empty_file() {
    assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
}

#[test]
fn rejects_unknown_keys_and_sections() {
    assert!(RunConfig::parse("[model]\nbeta = 1\n").is_err());
    assert!(RunConfig::parse("[nonsense]\nalpha = 1\n").is_err());
    assert!(RunConfig::parse("alpha = 2\n").is_err());
    assert!(RunConfig::parse("[model]\nalpha = 2\nalpha = 3\n").is_err());
}

#[test]
fn comments_and_whitespace_are_ignored() {
    let cfg = RunConfig::parse("# lab\n[model]\n  alpha =  3  \n; note\n[time]\nt_end = 12\n").unwrap();
    assert_eq!(cfg.alpha, 3.0);
    assert_eq!(cfg.t_end, 12.0);
}
