use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module(code: &str) {
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(kbk::kbk)(py);
        py.import("sys").unwrap().getattr("modules").unwrap().set_item("kbk", m).unwrap();
        let globals = PyDict::new(py);
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python snippet failed: {e}");
        }
    });
}

#[test]
fn soliton_round_trip_through_python() {
    with_module(
        r#"
import kbk
g = kbk.Grid(15.0, 2048)
assert len(g) == 2048 and g.n == 2048
s0 = kbk.good_soliton(g, 0.5)
assert abs(max(s0.v) - 3.0) < 1e-12
m = kbk.Model(g)
s1, samples = kbk.evolve(s0, m, 1.0, 1000, every=250)
assert len(samples) == 5 and samples[-1][0] == 1.0
exact = kbk.good_soliton(g, 0.5, t=1.0)
assert s1.max_abs_diff(exact) < 1e-9
d = kbk.diagnostics(s1, reference_energy=kbk.energy(s0))
assert d["delta"] < 1e-10 and len(d["rho"]) == 4
f = kbk.fit_soliton(s1)
assert abs(f["C"] - 0.5) < 1e-6
"#,
    );
}

#[test]
fn errors_map_to_python_exceptions() {
    with_module(
        r#"
import kbk
for bad in [lambda: kbk.Grid(1.0, 100), lambda: kbk.gaussian(kbk.Grid(1.0, 64), 1.0, kind="w")]:
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
"#,
    );
}

#[test]
fn scenario_runs_from_python() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("st");
    with_module(&format!(
        r#"
import kbk
r = kbk.run_scenario("soliton-test", {out:?}, N=1024, Nt=200, snapshots=2)
assert r["ok"], r["status"]
assert r["max_error"] < 1e-6
assert len(r["records"]) == 201
assert r["fit"] is not None
"#,
        out = out.to_str().unwrap()
    ));
    assert!(out.join("diagnostics.csv").exists());
}
