use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use serde_json::Value;

use smallscatter::mesh::{generate_sphere, write_obj, write_stl_binary};
use smallscatter::scenario::*;

const SINGLE: &str = r#"{
    "medium": {"k": 0.05},
    "incident": {"kind": "acoustic_plane", "direction": [0, 0, 1]},
    "bodies": [{"shape": {"kind": "sphere", "radius": 1, "subdivisions": 3}, "position": [0, 0, 2], "condition": "dirichlet"}],
    "outputs": ["charges", "shape_properties", {"far_field": {"grid": "default"}}]
}"#;

fn run_text(text: &str) -> Results {
    run(&parse_scenario(text).unwrap(), Path::new(".")).unwrap()
}

#[test]
fn single_sphere_charge_is_minus_capacitance_times_incident() {
    let r = run_text(SINGLE);
    let q = r.charges.unwrap()[0].0;
    let u0 = num_complex::Complex64::new(0.0, 0.05 * 2.0).exp();
    let expected = -4.0 * PI * u0;
    assert!((q - expected).norm() < 0.01 * expected.norm(), "{q} vs {expected}");
    let c = r.bodies[0].capacitance.as_ref().unwrap();
    assert_eq!(c.series.len(), 3);
    assert!(r.diagnostics.warnings.is_empty(), "{:?}", r.diagnostics.warnings);
}

#[test]
fn far_field_csv_has_one_row_per_direction() {
    let dir = tempfile::tempdir().unwrap();
    let written = write_results(&run_text(SINGLE), dir.path()).unwrap();
    assert_eq!(written.len(), 2);
    let csv = std::fs::read_to_string(dir.path().join(FAR_FIELD_FILE)).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 27);
    assert_eq!(lines[0], "dir_x,dir_y,dir_z,re,im,abs");
    for row in &lines[1..] {
        let v: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(v.len(), 6);
        assert!(((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 1.0).abs() < 1e-15);
        assert!((v[5] - v[3].hypot(v[4])).abs() <= 1e-15 * v[5]);
    }
}

#[test]
fn lat_long_grid_size() {
    let text = SINGLE.replace(r#""grid": "default""#, r#""grid": {"lat_long": {"n_theta": 5, "n_phi": 8}}"#);
    let ff = run_text(&text).far_field.unwrap();
    assert_eq!(ff.directions.len(), ff.amplitude.len());
    assert!(ff.directions.len() >= 6);
}

#[test]
fn repeated_bodies_share_shape_properties() {
    let text = r#"{
        "medium": {"k": 0.1},
        "incident": {"kind": "acoustic_plane", "direction": [0, 0, 1]},
        "bodies": [
            {"shape": {"kind": "sphere", "radius": 0.5, "subdivisions": 2}, "position": [0, 0, 0], "condition": "dirichlet"},
            {"shape": {"kind": "sphere", "radius": 0.5, "subdivisions": 2}, "position": [8, 0, 0], "condition": "dirichlet"},
            {"shape": {"kind": "sphere", "radius": 0.5, "subdivisions": 2}, "position": [0, 8, 0], "condition": "dirichlet"}
        ],
        "outputs": ["charges"]
    }"#;
    let r = run_text(text);
    assert_eq!(r.diagnostics.property_cache.computed, 1);
    assert_eq!(r.diagnostics.property_cache.reused, 2);
    let q = r.charges.unwrap();
    let x1 = r.bodies[1].reference_point;
    assert!((x1[0] - 8.0).abs() + x1[1].abs() + x1[2].abs() < 1e-12, "{x1:?}");
    assert!((q[1].0.norm() - q[2].0.norm()).abs() < 1e-12);
}

#[test]
fn fixed_point_and_direct_agree_through_the_pipeline() {
    let direct = run_text(SINGLE).charges.unwrap();
    let text = SINGLE.replace(r#""outputs""#, r#""solver": {"method": "fixed_point", "tol": 1e-13}, "outputs""#);
    let r = run_text(&text);
    let iterative = r.charges.unwrap();
    assert!((direct[0].0 - iterative[0].0).norm() < 1e-10);
    assert!(r.diagnostics.solver.is_some());
}

#[test]
fn neumann_scenario_reports_laplacians_and_gradients() {
    let text = r#"{
        "medium": {"k": 0.3},
        "incident": {"kind": "acoustic_plane", "direction": [0, 1, 0]},
        "bodies": [
            {"shape": {"kind": "ellipsoid", "semi_axes": [0.4, 0.3, 0.2], "subdivisions": 2}, "condition": "neumann"},
            {"shape": {"kind": "sphere", "radius": 0.3, "subdivisions": 2}, "position": [6, 0, 0], "condition": "neumann"}
        ],
        "outputs": ["charges", "shape_properties", {"far_field": {"grid": "default"}}, {"field_samples": {"points": [[0, 0, 20], [2, 0, 0]]}}]
    }"#;
    let r = run_text(text);
    let n = r.neumann.unwrap();
    assert_eq!(n.laplacians.len(), 2);
    assert_eq!(n.gradients.len(), 2);
    assert!(r.bodies[0].beta.is_some());
    let samples = r.field_samples.unwrap();
    assert_eq!(samples.len(), 2);
    assert!(!samples[0].near_field && samples[1].near_field);
}

#[test]
fn points_inside_bodies_fail_with_module_tag() {
    let text = SINGLE.replace(
        r#"{"far_field": {"grid": "default"}}"#,
        r#"{"field_samples": {"points": [[0, 0, 2.1]]}}"#,
    );
    let err = run(&parse_scenario(&text).unwrap(), Path::new(".")).unwrap_err();
    assert!(matches!(err, ScenarioError::Module { .. }), "{err}");
}

#[test]
fn em_scenario_far_field() {
    let text = r#"{
        "medium": {"k": 0.2},
        "incident": {"kind": "em_plane", "direction": [0, 0, 1], "polarization": [1, 0, 0]},
        "bodies": [{"shape": {"kind": "sphere", "radius": 1, "subdivisions": 2}, "eps": 4, "mu": 1}],
        "outputs": ["shape_properties", {"far_field": {"grid": "default"}}]
    }"#;
    let r = run_text(text);
    let ff = r.far_field.as_ref().unwrap();
    let em = ff.em.as_ref().unwrap();
    for (d, e) in ff.directions.iter().zip(&em.e) {
        let dot: num_complex::Complex64 = (0..3).map(|i| e[i].0 * d[i]).sum();
        assert!(dot.norm() < 1e-12);
    }
    let dir = tempfile::tempdir().unwrap();
    write_results(&r, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join(FAR_FIELD_FILE)).unwrap();
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 18);
}

#[test]
fn mesh_files_are_resolved_relative_to_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_sphere(1.0, 3).unwrap();
    write_stl_binary(&mesh, &mut std::fs::File::create(dir.path().join("ball.stl")).unwrap()).unwrap();
    write_obj(&mesh, &mut std::fs::File::create(dir.path().join("ball.obj")).unwrap()).unwrap();
    let text = SINGLE
        .replace(r#"{"kind": "sphere", "radius": 1, "subdivisions": 3}"#, r#"{"kind": "mesh", "path": "ball.stl"}"#)
        .replace(r#""position": [0, 0, 2], "#, "");
    let from_stl = run(&parse_scenario(&text).unwrap(), dir.path()).unwrap();
    let from_obj = run(&parse_scenario(&text.replace("ball.stl", "ball.obj")).unwrap(), dir.path()).unwrap();
    let generated = run_text(&SINGLE.replace(r#""position": [0, 0, 2], "#, ""));
    let c = |r: &Results| r.bodies[0].capacitance.as_ref().unwrap().value;
    assert!((c(&from_stl) - c(&generated)).abs() < 1e-5 * c(&generated));
    assert!((c(&from_obj) - c(&generated)).abs() < 1e-12 * c(&generated));

    let missing = run(&parse_scenario(&text.replace("ball.stl", "nope.stl")).unwrap(), dir.path()).unwrap_err();
    assert!(missing.to_string().contains("body 0"), "{missing}");
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smallscatter"))
}

fn scenario_file(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("scene.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn cli_solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(dir.path(), SINGLE);
    let out = dir.path().join("out");
    let status = cli()
        .args(["solve", "--scenario"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .args(["--method", "fixed-point", "--tol", "1e-13", "--threads", "2"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(out.join(RESULTS_FILE)).unwrap()).unwrap();
    assert_eq!(json["diagnostics"]["solver"]["method"]["kind"], "fixed_point");
    assert_eq!(std::fs::read_to_string(out.join(FAR_FIELD_FILE)).unwrap().lines().count(), 27);
}

#[test]
fn cli_props_prints_shape_properties_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(dir.path(), SINGLE);
    let output = cli().args(["props", "--scenario"]).arg(&path).output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let json: Value = serde_json::from_slice(&output.stdout).unwrap();
    let c = json["bodies"][0]["capacitance"]["value"].as_f64().unwrap();
    assert!((c - 4.0 * PI).abs() < 0.05 * 4.0 * PI);
    assert!(json.get("charges").is_none_or(Value::is_null));
    assert!(json.get("far_field").is_none_or(Value::is_null));
}

#[test]
fn cli_check_reports_regime() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(dir.path(), SINGLE);
    let output = cli().args(["check", "--scenario"]).arg(&path).output().unwrap();
    assert!(output.status.success());
    let json: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(json["diagnostics"]["regime"]["ka"].as_f64().unwrap() > 0.0);
}

#[test]
fn cli_reports_parse_errors_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario_file(dir.path(), &SINGLE.replace(r#""k": 0.05"#, r#""k": 0.05, "omega": 1"#));
    let output = cli().args(["solve", "--scenario"]).arg(&path).output().unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("medium.omega") && err.contains("line 2"), "{err}");
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

fn positive() -> impl Strategy<Value = f64> {
    (prop::num::f64::POSITIVE | prop::num::f64::NORMAL).prop_map(f64::abs)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn scenarios_round_trip_exactly(
        k in positive(),
        pos in prop::array::uniform3(finite()),
        zeta in (finite(), finite()),
        radius in positive(),
        tol in positive(),
    ) {
        let mut s = parse_scenario(SINGLE).unwrap();
        s.medium.k = k;
        s.bodies[0].position = pos;
        s.bodies[0].shape = ShapeSpec::Sphere { radius, subdivisions: 2 };
        s.bodies[0].condition = Some(ConditionKind::Impedance);
        s.bodies[0].zeta = Some(Complex(num_complex::Complex64::new(zeta.0, zeta.1)));
        s.solver.tol = tol;
        let text = to_json_string(&s);
        let back: Scenario = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn shipped_scenarios_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let s = load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let r = check(&s, path.parent().unwrap()).unwrap();
            assert!(r.diagnostics.warnings.is_empty(), "{}: {:?}", path.display(), r.diagnostics.warnings);
            count += 1;
        }
    }
    assert!(count >= 3);
}
