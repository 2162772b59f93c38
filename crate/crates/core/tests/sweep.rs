use cascade_cooling::config::parse_config;
use cascade_cooling::output::{csv_string, write_outputs};
use cascade_cooling::par::Execution;
use cascade_cooling::presets::{preset, preset_text, PRESETS};
use cascade_cooling::sweep::{run_sweep, Cell, Format, Target, STATUS_OK};
use cascade_cooling::Error;

fn fig2_with(sweep: &str) -> String {
    let text = preset_text("fig2").unwrap();
    let head = &text[..text.find("[sweep]").unwrap()];
    format!("{head}{sweep}")
}

#[test]
fn presets_parse_and_match_targets() {
    let expect = [
        ("fig2", Target::TwoMode),
        ("fig3", Target::TwoMode),
        ("fig4", Target::TwoMode),
        ("fig5", Target::TwoMode),
        ("fig6", Target::AdiabaticCompare),
        ("fig7", Target::AdiabaticCompare),
        ("fig8", Target::Chain),
    ];
    assert_eq!(PRESETS.len(), expect.len());
    for (name, target) in expect {
        let s = preset(name).unwrap().sweep.unwrap();
        assert_eq!(s.target, target, "{name}");
    }
}

#[test]
fn deterministic_across_workers() {
    let mut s = preset("fig2").unwrap().sweep.unwrap();
    s.axes[0].count = 12;
    s.axes[1].count = 9;
    s.execution = Execution::Sequential;
    let seq = csv_string(&run_sweep(&s).unwrap()).unwrap();
    s.execution = Execution::Parallel;
    for w in [1, 2, 5] {
        s.workers = Some(w);
        assert_eq!(csv_string(&run_sweep(&s).unwrap()).unwrap(), seq, "{w} workers");
    }
    assert_eq!(seq.lines().count(), 1 + 12 * 9);
}

#[test]
fn degenerate_axis_gives_identical_rows() {
    let text = fig2_with(
        "[sweep]\ntarget = \"two_mode\"\n[[sweep.axis]]\nname = \"delta\"\nmin = 1.0\nmax = 1.0\ncount = 2\n",
    );
    let s = parse_config(&text).unwrap().sweep.unwrap();
    let r = run_sweep(&s).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert_eq!(r.rows[0], r.rows[1]);
}

#[test]
fn occupations_present_iff_ok() {
    let text = fig2_with(
        "[sweep]\ntarget = \"two_mode\"\nmethods = [\"closedform\", \"lyapunov\", \"adiabatic_simplified\"]\n\
         [[sweep.axis]]\nname = \"delta\"\nmin = -1.5\nmax = 1.5\ncount = 31\n",
    );
    let s = parse_config(&text).unwrap().sweep.unwrap();
    let r = run_sweep(&s).unwrap();
    let status = r.column("status").unwrap();
    let mut unstable = 0;
    for row in &r.rows {
        let ok = row[status].text() == Some(STATUS_OK);
        unstable += (row[status].text() == Some("unstable")) as usize;
        for m in ["closedform", "lyapunov", "adiabatic_simplified"] {
            let ms = r.column(&format!("status_{m}")).unwrap();
            let n1 = r.column(&format!("n1_{m}")).unwrap();
            let method_ok = row[ms].text() == Some(STATUS_OK);
            assert_eq!(row[n1].num().is_some(), method_ok);
            if ok {
                assert!(method_ok);
            }
        }
    }
    assert!(unstable > 0, "blue detuning should include unstable points");
}

#[test]
fn empty_result_warns() {
    let text = fig2_with(
        "[sweep]\ntarget = \"two_mode\"\n[[sweep.axis]]\nname = \"delta\"\nmin = -1.2\nmax = -0.8\ncount = 3\n",
    );
    let s = parse_config(&text).unwrap().sweep.unwrap();
    let r = run_sweep(&s).unwrap();
    assert_eq!(r.warnings.len(), 1);
    for row in &r.rows {
        assert!(row[4..].iter().all(|c| matches!(c, Cell::Missing | Cell::Text(_))));
    }
}

#[test]
fn invalid_specs_name_the_field() {
    let cases = [
        ("name = \"delta\"\nmin = 0.5\nmax = 1.5\ncount = 1\n", "sweep.axis[0].count"),
        ("name = \"delta\"\nmin = 1.5\nmax = 0.5\ncount = 3\n", "sweep.axis[0].min"),
        ("name = \"delta\"\nmin = 0.0\nmax = 1.5\ncount = 3\nscale = \"log\"\n", "sweep.axis[0].min"),
        ("name = \"mass\"\nmin = 0.5\nmax = 1.5\ncount = 3\n", "sweep.axis[0].name"),
    ];
    for (axis, path) in cases {
        let text = fig2_with(&format!("[sweep]\ntarget = \"two_mode\"\n[[sweep.axis]]\n{axis}"));
        match parse_config(&text) {
            Err(Error::Config { path: p, .. }) => assert_eq!(p, path),
            other => panic!("{axis}: {other:?}"),
        }
    }
    let three = fig2_with(
        "[sweep]\ntarget = \"two_mode\"\n\
         [[sweep.axis]]\nname = \"delta\"\nmin = 0.5\nmax = 1.5\ncount = 3\n\
         [[sweep.axis]]\nname = \"kappa\"\nmin = 0.1\nmax = 0.5\ncount = 3\n\
         [[sweep.axis]]\nname = \"eta0\"\nmin = 0.01\nmax = 0.05\ncount = 3\n",
    );
    assert!(matches!(parse_config(&three), Err(Error::Config { .. })));
}

#[test]
fn writes_table_script_and_provenance() {
    let mut s = preset("fig8").unwrap().sweep.unwrap();
    s.axes[0].count = 5;
    let r = run_sweep(&s).unwrap();
    assert_eq!(r.columns, ["delta", "status", "n_a", "n_1", "n_2", "n_3"]);
    let dir = tempfile::tempdir().unwrap();
    let w = write_outputs(&r, &dir.path().join("out/fig8.csv"), Format::Csv).unwrap();
    let table = std::fs::read_to_string(&w.table).unwrap();
    assert_eq!(table.lines().count(), 6);
    let prov: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&w.provenance).unwrap()).unwrap();
    assert_eq!(prov["provenance"]["chain"]["n_resonators"], 3);
    assert!(prov["provenance"]["created_unix"].as_u64().unwrap() > 0);
    assert!(std::fs::read_to_string(w.gnuplot.unwrap()).unwrap().contains("fig8.csv"));

    let j = write_outputs(&r, &dir.path().join("fig8.json"), Format::Json).unwrap();
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&j.table).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);
    assert_eq!(rows[0]["status"], "ok");
}
