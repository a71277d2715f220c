use rvp_core::dynamics::{
    boost_to_zero_energy, plummer_at_ratio, plummer_data, run, write_diagnostics_csv, RunConfig, DEFAULT_CUT,
    DIAGNOSTICS_HEADER,
};
use rvp_core::par::Execution;

fn csv(cfg: &RunConfig, seed: u64) -> Vec<u8> {
    let data = plummer_at_ratio(0.5, 0.5, DEFAULT_CUT, 500, seed).unwrap();
    let cfg = RunConfig {
        norm_3_2: Some(data.summary.norm_3_2),
        ..cfg.clone()
    };
    let out = run(&data.ensemble, &cfg).unwrap();
    let mut buf = Vec::new();
    write_diagnostics_csv(&out.records, &mut buf).unwrap();
    buf
}

#[test]
fn same_seed_gives_identical_csv() {
    let cfg = RunConfig {
        t_end: 1.0,
        ..RunConfig::default()
    };
    let a = csv(&cfg, 5);
    assert_eq!(a, csv(&cfg, 5));
    assert_ne!(a, csv(&cfg, 6));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(&DIAGNOSTICS_HEADER.join(",")));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn parallel_and_sequential_runs_agree_bitwise() {
    let base = RunConfig {
        t_end: 0.5,
        ..RunConfig::default()
    };
    let seq = csv(&RunConfig { exec: Execution::Sequential, ..base.clone() }, 9);
    let par = csv(&RunConfig { exec: Execution::Parallel, ..base }, 9);
    assert_eq!(seq, par);
}

#[test]
fn zero_energy_virial_decreases() {
    let data = boost_to_zero_energy(&plummer_data(30.0, 4.0, DEFAULT_CUT, 1000, 3).unwrap()).unwrap();
    let out = run(
        &data.ensemble,
        &RunConfig {
            cadence: 1e-3,
            r_floor: 1e-9,
            norm_3_2: Some(data.summary.norm_3_2),
            ..RunConfig::default()
        },
    )
    .unwrap();
    assert!(out.verdict.is_blowup(), "{:?}", out.verdict);
    assert!(out.records.len() >= 3);
    for w in out.records.windows(2) {
        assert!(w[1].virial < w[0].virial, "{} -> {}", w[0].virial, w[1].virial);
    }
}

#[test]
fn outcome_serializes_to_json() {
    let data = plummer_at_ratio(0.5, 0.5, DEFAULT_CUT, 200, 1).unwrap();
    let out = run(
        &data.ensemble,
        &RunConfig {
            t_end: 0.3,
            norm_3_2: Some(data.summary.norm_3_2),
            ..RunConfig::default()
        },
    )
    .unwrap();
    let v = serde_json::to_value(out.verdict).unwrap();
    assert_eq!(v["verdict"], "no-blow-up-observed");
    let d = serde_json::to_value(out.drifts).unwrap();
    assert!(d["energy"].as_f64().unwrap() < 1e-6);
}
