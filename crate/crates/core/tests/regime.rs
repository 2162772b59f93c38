use cascade_cooling::params::check_regime;
use cascade_cooling::presets::preset;

// At the fig6 point kappa / |G~| is about 1.5 and |G~| / Gamma1 is below 1,
// so this fails under any reading of the hierarchy.
#[test]
fn fig6_parameters_satisfy_hierarchy() {
    let s = preset("fig6").unwrap().two_mode.unwrap();
    let (n, op) = s.resolve().unwrap();
    let report = check_regime(&n, &op);
    assert!(report.hierarchy_ok, "{:?}", report.ratios);
}
