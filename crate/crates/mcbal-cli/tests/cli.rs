//! End-to-end tests of the `mcbal` binary: exit codes, report contents,
//! determinism, and the golden eval report.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mcbal_core::image::load_image;
use mcbal_core::synth::PatchScene;

fn mcbal() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mcbal"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    mcbal()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn mcbal")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

const CHART_SCENE: &str = "[chart]\npatch_size = 32\ngutter = 8\n";

const BRADFORD_CAST: &str = "\n[cast]\nmodel = \"bradford\"\ngains = [1.3, 1.0, 0.7]\n";

/// Rects of the chart patches used in job configs, from the 32px/8px grid.
fn chart_rect(name: &str) -> [u32; 4] {
    let scene = PatchScene::color_checker(32, 8, false);
    let p = scene.patch(name).expect("patch exists");
    [p.region.x0, p.region.y0, p.region.w, p.region.h]
}

fn rect_str(name: &str) -> String {
    let [x, y, w, h] = chart_rect(name);
    format!("[{x}, {y}, {w}, {h}]")
}

fn write_chart_scene(dir: &Path, file: &str, cast: &str) {
    fs::write(dir.join(file), format!("{CHART_SCENE}{cast}")).unwrap();
}

fn synth(dir: &Path, scene: &str, out: &str) {
    let output = run_in(dir, &["synth", "--config", scene, "--out", out]);
    assert_exit(&output, 0);
}

fn mcb_job(input: &str, output: &str) -> String {
    format!(
        r#"input = "{input}"
output = "{output}"
method = "mcb"

[[region]]
name = "red"
role = "target1"
rect = {red}

[[region]]
name = "green"
role = "target2"
rect = {green}

[[region]]
name = "blue"
role = "target3"
rect = {blue}

[[region]]
name = "white"
role = "white"
rect = {white}

[benchmarks]
red = [0.3893, 0.1986, 0.1124]
green = [0.3454, 0.6006, 0.1923]
blue = [0.1804, 0.0722, 0.9503]
white = "D65"
"#,
        red = rect_str("red"),
        green = rect_str("green"),
        blue = rect_str("blue"),
        white = rect_str("white"),
    )
}

fn report_json(dir: &Path, name: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn region_row<'a>(report: &'a serde_json::Value, name: &str) -> &'a serde_json::Value {
    report["regions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == name)
        .unwrap_or_else(|| panic!("region {name} in report"))
}

#[test]
fn synth_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("scene.toml"),
        format!("noise_sigma = 0.004\nseed = 9\n{CHART_SCENE}{BRADFORD_CAST}"),
    )
    .unwrap();
    synth(dir.path(), "scene.toml", "a.png");
    synth(dir.path(), "scene.toml", "b.png");
    let a = fs::read(dir.path().join("a.png")).unwrap();
    let b = fs::read(dir.path().join("b.png")).unwrap();
    assert_eq!(a, b);

    let output = run_in(
        dir.path(),
        &["synth", "--config", "scene.toml", "--out", "c.png", "--seed", "10"],
    );
    assert_exit(&output, 0);
    let c = fs::read(dir.path().join("c.png")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn synth_rejects_overlapping_patches() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.toml"),
        r#"width = 64
height = 64

[[patch]]
name = "a"
rect = [0, 0, 40, 40]
color = [0.3, 0.3, 0.3]

[[patch]]
name = "b"
rect = [20, 20, 40, 40]
color = [0.5, 0.2, 0.1]
"#,
    )
    .unwrap();
    let output = run_in(dir.path(), &["synth", "--config", "bad.toml", "--out", "x.png"]);
    assert_exit(&output, 1);
    assert!(String::from_utf8_lossy(&output.stderr).contains("overlap"));
}

#[test]
fn correct_identity_fit_leaves_image_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene.toml", "");
    synth(dir.path(), "scene.toml", "input.png");

    // Benchmarks measured from the rendered image itself: S = D, so the
    // fit is the identity and the output must match the input.
    let xyz = load_image(dir.path().join("input.png"))
        .unwrap()
        .to_xyz()
        .unwrap();
    let scene = PatchScene::color_checker(32, 8, false);
    let mut benchmarks = String::new();
    for name in ["red", "green", "blue"] {
        let mean = xyz.region_mean(&scene.patch(name).unwrap().region).unwrap();
        benchmarks.push_str(&format!(
            "{name} = [{:.17e}, {:.17e}, {:.17e}]\n",
            mean.x, mean.y, mean.z
        ));
    }
    let job = format!(
        r#"input = "input.png"
output = "out.png"
method = "mcb"

[[region]]
name = "red"
role = "target1"
rect = {red}

[[region]]
name = "green"
role = "target2"
rect = {green}

[[region]]
name = "blue"
role = "target3"
rect = {blue}

[benchmarks]
{benchmarks}"#,
        red = rect_str("red"),
        green = rect_str("green"),
        blue = rect_str("blue"),
    );
    fs::write(dir.path().join("job.toml"), job).unwrap();
    let output = run_in(
        dir.path(),
        &["correct", "--config", "job.toml", "--report", "r.json"],
    );
    assert_exit(&output, 0);

    let input = load_image(dir.path().join("input.png")).unwrap();
    let out = load_image(dir.path().join("out.png")).unwrap();
    for (a, b) in input.pixels().iter().zip(out.pixels()) {
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() <= 1.0 / 65535.0);
        }
    }
    let report = report_json(dir.path(), "r.json");
    for name in ["red", "green", "blue"] {
        let row = region_row(&report, name);
        assert!(row["angular_error"].as_f64().unwrap() < 1e-9);
        assert!(row["delta_h"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn correct_mcb_zero_pattern_on_cast_scene() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene.toml", BRADFORD_CAST);
    synth(dir.path(), "scene.toml", "cast.png");
    fs::write(dir.path().join("job.toml"), mcb_job("cast.png", "out.png")).unwrap();
    let output = run_in(
        dir.path(),
        &["correct", "--config", "job.toml", "--report", "r.json"],
    );
    assert_exit(&output, 0);
    let report = report_json(dir.path(), "r.json");
    // Exact zeros in precisely the three fitted cells; white stays wrong.
    for name in ["red", "green", "blue"] {
        let err = region_row(&report, name)["angular_error"].as_f64().unwrap();
        assert!(err <= 1e-8, "{name}: {err}");
    }
    let white = region_row(&report, "white")["angular_error"].as_f64().unwrap();
    assert!(white > 1e-3, "white should remain uncorrected, got {white}");
}

#[test]
fn correct_wb_fixes_white_only() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene.toml", BRADFORD_CAST);
    synth(dir.path(), "scene.toml", "cast.png");
    fs::write(dir.path().join("job.toml"), mcb_job("cast.png", "out.png")).unwrap();
    let output = run_in(
        dir.path(),
        &[
            "correct",
            "--config",
            "job.toml",
            "--method",
            "wb-xyz",
            "--report",
            "r.json",
        ],
    );
    assert_exit(&output, 0);
    let report = report_json(dir.path(), "r.json");
    assert_eq!(report["method"], "wb-xyz");
    let white = region_row(&report, "white")["angular_error"].as_f64().unwrap();
    assert!(white <= 1e-8, "white error {white}");
    let max_chromatic = ["red", "green", "blue"]
        .iter()
        .map(|n| region_row(&report, n)["angular_error"].as_f64().unwrap())
        .fold(0.0f64, f64::max);
    assert!(max_chromatic > 1e-3);
}

/// Writes an 8-bit PPM of three gray patches. Equal encoded channels
/// decode to exact scalar multiples of the white vector, so the sampled
/// source matrix is rank-deficient to machine precision.
fn write_gray_patch_ppm(path: &Path) {
    let (w, h) = (96u32, 24u32);
    let mut payload = Vec::with_capacity((w * h * 3) as usize);
    for _y in 0..h {
        for x in 0..w {
            let level: u8 = match x / 32 {
                0 => 60,
                1 => 120,
                _ => 180,
            };
            payload.extend_from_slice(&[level, level, level]);
        }
    }
    let mut bytes = format!("P6\n{w} {h}\n255\n").into_bytes();
    bytes.extend_from_slice(&payload);
    fs::write(path, bytes).unwrap();
}

#[test]
fn colinear_targets_exit_2_and_name_regions() {
    let dir = tempfile::tempdir().unwrap();
    write_gray_patch_ppm(&dir.path().join("gray.ppm"));
    fs::write(
        dir.path().join("job.toml"),
        r#"input = "gray.ppm"
output = "out.png"
method = "mcb"

[[region]]
name = "g1"
role = "target1"
rect = [0, 0, 32, 24]

[[region]]
name = "g2"
role = "target2"
rect = [32, 0, 32, 24]

[[region]]
name = "g3"
role = "target3"
rect = [64, 0, 32, 24]

[benchmarks]
g1 = [0.3893, 0.1986, 0.1124]
g2 = [0.3454, 0.6006, 0.1923]
g3 = [0.1804, 0.0722, 0.9503]
"#,
    )
    .unwrap();
    let output = run_in(dir.path(), &["correct", "--config", "job.toml"]);
    assert_exit(&output, 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("colinear"), "stderr: {stderr}");
    assert!(stderr.contains("g1") && stderr.contains("g2") && stderr.contains("g3"));
    assert!(!dir.path().join("out.png").exists());
}

#[test]
fn degenerate_white_point_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("scene.toml"),
        r#"width = 64
height = 64
background = [0.2, 0.2, 0.2]

[[patch]]
name = "void"
rect = [8, 8, 24, 24]
color = [0.0, 0.0, 0.0]
"#,
    )
    .unwrap();
    synth(dir.path(), "scene.toml", "dark.png");
    fs::write(
        dir.path().join("job.toml"),
        r#"input = "dark.png"
output = "out.png"
method = "wb-xyz"

[[region]]
name = "void"
role = "white"
rect = [8, 8, 24, 24]
"#,
    )
    .unwrap();
    let output = run_in(dir.path(), &["correct", "--config", "job.toml"]);
    assert_exit(&output, 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("degenerate white point"));
}

#[test]
fn missing_target_region_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene.toml", "");
    synth(dir.path(), "scene.toml", "img.png");
    fs::write(
        dir.path().join("job.toml"),
        format!(
            r#"input = "img.png"
output = "out.png"
method = "mcb"

[[region]]
name = "red"
role = "target1"
rect = {}

[benchmarks]
red = [0.3893, 0.1986, 0.1124]
"#,
            rect_str("red")
        ),
    )
    .unwrap();
    let output = run_in(dir.path(), &["correct", "--config", "job.toml"]);
    assert_exit(&output, 1);
    assert!(String::from_utf8_lossy(&output.stderr).contains("target2"));
}

#[test]
fn correct_pair_shared_benchmarks_agree_and_mismatch_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene1.toml", BRADFORD_CAST);
    write_chart_scene(
        dir.path(),
        "scene2.toml",
        "\n[cast]\nmodel = \"xyz-scaling\"\ngains = [0.8, 1.05, 1.2]\n",
    );
    synth(dir.path(), "scene1.toml", "cast1.png");
    synth(dir.path(), "scene2.toml", "cast2.png");
    fs::write(dir.path().join("job1.toml"), mcb_job("cast1.png", "out1.png")).unwrap();
    fs::write(dir.path().join("job2.toml"), mcb_job("cast2.png", "out2.png")).unwrap();

    let output = run_in(
        dir.path(),
        &["correct-pair", "job1.toml", "job2.toml", "--report", "pair.json"],
    );
    assert_exit(&output, 0);
    let report = report_json(dir.path(), "pair.json");
    for row in report["cross"].as_array().unwrap() {
        let name = row["name"].as_str().unwrap();
        if ["red", "green", "blue"].contains(&name) {
            let err = row["angular_error"].as_f64().unwrap();
            assert!(err < 1e-6, "{name}: cross error {err}");
        }
    }

    // Identical inputs produce identical outputs.
    fs::write(dir.path().join("job1b.toml"), mcb_job("cast1.png", "out1b.png")).unwrap();
    let output = run_in(dir.path(), &["correct-pair", "job1.toml", "job1b.toml"]);
    assert_exit(&output, 0);
    let a = fs::read(dir.path().join("out1.png")).unwrap();
    let b = fs::read(dir.path().join("out1b.png")).unwrap();
    assert_eq!(a, b);

    // A region missing from the second config is a config error.
    let mut truncated = mcb_job("cast2.png", "out2.png");
    truncated = truncated.replace(
        &format!(
            "[[region]]\nname = \"white\"\nrole = \"white\"\nrect = {}\n",
            rect_str("white")
        ),
        "",
    );
    truncated = truncated.replace("white = \"D65\"\n", "");
    fs::write(dir.path().join("job2_missing.toml"), truncated).unwrap();
    let output = run_in(dir.path(), &["correct-pair", "job1.toml", "job2_missing.toml"]);
    assert_exit(&output, 1);
    assert!(String::from_utf8_lossy(&output.stderr).contains("missing region 'white'"));

    // A differing benchmark value is a config error.
    let altered = mcb_job("cast2.png", "out2.png")
        .replace("red = [0.3893, 0.1986, 0.1124]", "red = [0.4, 0.2, 0.11]");
    fs::write(dir.path().join("job2_diff.toml"), altered).unwrap();
    let output = run_in(dir.path(), &["correct-pair", "job1.toml", "job2_diff.toml"]);
    assert_exit(&output, 1);
    assert!(String::from_utf8_lossy(&output.stderr).contains("differs"));
}

#[test]
fn eval_zero_table_on_corrected_image_and_positive_on_cast() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene.toml", BRADFORD_CAST);
    synth(dir.path(), "scene.toml", "cast.png");
    fs::write(dir.path().join("job.toml"), mcb_job("cast.png", "corrected.png")).unwrap();
    assert_exit(&run_in(dir.path(), &["correct", "--config", "job.toml"]), 0);

    // Evaluate the corrected file: fitted targets are zero up to the
    // 16-bit quantization of the written file.
    fs::write(
        dir.path().join("eval_corrected.toml"),
        mcb_job("corrected.png", "unused.png"),
    )
    .unwrap();
    let output = run_in(
        dir.path(),
        &[
            "eval",
            "--config",
            "eval_corrected.toml",
            "--report",
            "ec.json",
        ],
    );
    assert_exit(&output, 0);
    let report = report_json(dir.path(), "ec.json");
    for name in ["red", "green", "blue"] {
        let err = region_row(&report, name)["angular_error"].as_f64().unwrap();
        assert!(err < 1e-3, "{name}: {err} (quantization-limited)");
    }

    // The uncast image scores strictly positive everywhere.
    fs::write(
        dir.path().join("eval_cast.toml"),
        mcb_job("cast.png", "unused.png"),
    )
    .unwrap();
    let output = run_in(
        dir.path(),
        &["eval", "--config", "eval_cast.toml", "--report", "raw.json"],
    );
    assert_exit(&output, 0);
    let report = report_json(dir.path(), "raw.json");
    for name in ["red", "green", "blue", "white"] {
        let err = region_row(&report, name)["angular_error"].as_f64().unwrap();
        assert!(err > 1e-3, "{name}: {err}");
    }
}

#[test]
fn degrees_flag_scales_angular_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene.toml", BRADFORD_CAST);
    synth(dir.path(), "scene.toml", "cast.png");
    fs::write(dir.path().join("job.toml"), mcb_job("cast.png", "unused.png")).unwrap();
    for (flag, name) in [(None, "rad.json"), (Some("--degrees"), "deg.json")] {
        let mut args = vec!["eval", "--config", "job.toml", "--report", name];
        if let Some(f) = flag {
            args.push(f);
        }
        assert_exit(&run_in(dir.path(), &args), 0);
    }
    let rad = report_json(dir.path(), "rad.json");
    let deg = report_json(dir.path(), "deg.json");
    assert_eq!(rad["angle_unit"], "radians");
    assert_eq!(deg["angle_unit"], "degrees");
    let r = region_row(&rad, "white")["angular_error"].as_f64().unwrap();
    let d = region_row(&deg, "white")["angular_error"].as_f64().unwrap();
    assert!((d - r.to_degrees()).abs() < 1e-9);
}

#[test]
fn eval_report_matches_golden_fixture() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene.toml", BRADFORD_CAST);
    synth(dir.path(), "scene.toml", "cast.png");
    fs::write(dir.path().join("job.toml"), mcb_job("cast.png", "unused.png")).unwrap();
    let output = run_in(
        dir.path(),
        &["eval", "--config", "job.toml", "--report", "report.json"],
    );
    assert_exit(&output, 0);
    let got = fs::read(dir.path().join("report.json")).unwrap();
    let golden_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/eval_golden.json");
    let golden = fs::read(&golden_path).unwrap();
    assert_eq!(
        got,
        golden,
        "eval report differs from frozen fixture;\ngot:\n{}",
        String::from_utf8_lossy(&fs::read(dir.path().join("report.json")).unwrap())
    );
}

#[test]
fn synth_chart_patch_means_match_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene.toml", "");
    synth(dir.path(), "scene.toml", "chart.png");
    let xyz = load_image(dir.path().join("chart.png"))
        .unwrap()
        .to_xyz()
        .unwrap();
    let scene = PatchScene::color_checker(32, 8, false);
    for patch in &scene.patches {
        let mean = xyz.region_mean(&patch.region).unwrap();
        // One 16-bit quantization step through the decode slope.
        assert!(
            mean.max_abs_diff(patch.color) < 1e-4,
            "{}: {mean:?} vs {:?}",
            patch.region.label,
            patch.color
        );
    }
}

#[test]
fn cond_threshold_flag_tightens_the_colinearity_gate() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene.toml", BRADFORD_CAST);
    synth(dir.path(), "scene.toml", "cast.png");
    fs::write(dir.path().join("job.toml"), mcb_job("cast.png", "out.png")).unwrap();
    // Any nontrivial source triple has condition number above 1.
    let output = run_in(
        dir.path(),
        &["correct", "--config", "job.toml", "--cond-threshold", "1.0"],
    );
    assert_exit(&output, 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("colinear"));
}

#[test]
fn rank_deficient_benchmarks_warn_but_succeed() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene.toml", BRADFORD_CAST);
    synth(dir.path(), "scene.toml", "cast.png");
    let job = mcb_job("cast.png", "out.png")
        .replace("red = [0.3893, 0.1986, 0.1124]", "red = [0.2, 0.2, 0.2]")
        .replace("green = [0.3454, 0.6006, 0.1923]", "green = [0.4, 0.4, 0.4]")
        .replace("blue = [0.1804, 0.0722, 0.9503]", "blue = [0.1, 0.1, 0.1]");
    fs::write(dir.path().join("job.toml"), job).unwrap();
    let output = run_in(dir.path(), &["correct", "--config", "job.toml"]);
    assert_exit(&output, 0);
    assert!(String::from_utf8_lossy(&output.stderr).contains("warning"));
    assert!(dir.path().join("out.png").exists());
}

#[test]
fn ppm_output_works() {
    let dir = tempfile::tempdir().unwrap();
    write_chart_scene(dir.path(), "scene.toml", "");
    let output = run_in(
        dir.path(),
        &["synth", "--config", "scene.toml", "--out", "img.ppm", "--bit-depth", "8"],
    );
    assert_exit(&output, 0);
    let img = load_image(dir.path().join("img.ppm")).unwrap();
    assert_eq!(img.width(), 248);
    assert_eq!(img.height(), 168);
}
