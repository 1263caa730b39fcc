//! Implementations of the four subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use mcbal_core::balance::{multi_color_balance_matrix_with, white_balance_matrix, ColorTriple};
use mcbal_core::colorspace::{illuminant, xyz_to_lab, ColorXYZ};
use mcbal_core::image::{load_image, save_image, ImageBuffer};
use mcbal_core::metrics::{ciede2000, evaluate_region, reproduction_angular_error};
use mcbal_core::synth::render;
use mcbal_core::{Error as CoreError, Matrix3};

use crate::config::{Job, Method, Overrides, Role, SceneJob};
use crate::report::{
    angle_unit_name, print_correct, print_eval, print_pair, write_json, CorrectReport, CrossRow,
    EvalReport, EvalRow, PairReport, RegionRow,
};

fn convert_angle(v: f64, degrees: bool) -> f64 {
    if degrees {
        v.to_degrees()
    } else {
        v
    }
}

/// The fitted matrix plus the whites it was built from (white balance only).
struct FittedMatrix {
    matrix: Matrix3,
    source_white: Option<ColorXYZ>,
    dest_white: Option<ColorXYZ>,
}

fn fit_matrix(job: &Job, xyz: &ImageBuffer) -> Result<FittedMatrix> {
    match job.method {
        Method::Mcb => {
            let mut sources = Vec::with_capacity(3);
            let mut dests = Vec::with_capacity(3);
            for role in [Role::Target1, Role::Target2, Role::Target3] {
                let target = job.unique_region(role)?;
                sources.push(xyz.region_mean(&target.region)?);
                dests.push(target.benchmark);
            }
            let sources = ColorTriple::new(sources[0], sources[1], sources[2]);
            let dests = ColorTriple::new(dests[0], dests[1], dests[2]);
            if dests.condition_number() >= job.cond_threshold {
                eprintln!(
                    "warning: benchmark colors are nearly colinear (condition {:.3e}); \
                     the fitted matrix is singular or close to it",
                    dests.condition_number()
                );
            }
            let matrix = multi_color_balance_matrix_with(&sources, &dests, job.cond_threshold)
                .map_err(|e| annotate_colinear(e, job))?;
            Ok(FittedMatrix {
                matrix,
                source_white: None,
                dest_white: None,
            })
        }
        _ => {
            let model = job
                .method
                .adaptation_model()
                .expect("non-MCB methods carry a model");
            let white = job.unique_region(Role::White)?;
            let source_white = xyz.region_mean(&white.region)?;
            let dest_white = white.benchmark;
            let matrix = white_balance_matrix(source_white, dest_white, model)?;
            Ok(FittedMatrix {
                matrix,
                source_white: Some(source_white),
                dest_white: Some(dest_white),
            })
        }
    }
}

/// Names the offending regions when the source triple is rejected.
fn annotate_colinear(err: CoreError, job: &Job) -> anyhow::Error {
    if matches!(err, CoreError::ColinearTargetColors { .. }) {
        let names: Vec<_> = [Role::Target1, Role::Target2, Role::Target3]
            .iter()
            .filter_map(|&role| job.regions_with_role(role).next())
            .map(|r| r.region.label.clone())
            .collect();
        anyhow::Error::new(err).context(format!(
            "target regions [{}] sample linearly dependent colors",
            names.join(", ")
        ))
    } else {
        err.into()
    }
}

struct CorrectOutcome {
    report: CorrectReport,
    /// Corrected image still in XYZ, for cross-image comparisons.
    corrected: ImageBuffer,
}

fn run_correct_job(job: &Job) -> Result<CorrectOutcome> {
    let output = job
        .output
        .clone()
        .context("no output path: set `output` in the config or pass --out")?;
    let encoded = load_image(&job.input)?;
    let xyz = encoded.to_xyz()?;

    let means_before: Vec<ColorXYZ> = job
        .regions
        .iter()
        .map(|r| xyz.region_mean(&r.region))
        .collect::<mcbal_core::Result<_>>()?;

    let fitted = fit_matrix(job, &xyz)?;
    let corrected = xyz.apply_correction(&fitted.matrix)?;

    let mut rows = Vec::with_capacity(job.regions.len());
    for (jr, mean_before) in job.regions.iter().zip(&means_before) {
        let metrics = evaluate_region(&corrected, &jr.region, jr.benchmark, illuminant::D65)?;
        let mean_after = corrected.region_mean(&jr.region)?;
        rows.push(RegionRow {
            name: jr.region.label.clone(),
            role: jr.role.name().to_string(),
            rect: [jr.region.x0, jr.region.y0, jr.region.w, jr.region.h],
            benchmark: jr.benchmark.to_array(),
            mean_before: mean_before.to_array(),
            mean_after: mean_after.to_array(),
            angular_error: metrics.angular_error.map(|v| convert_angle(v, job.degrees)),
            delta_h: metrics.hue_difference,
        });
    }

    save_image(&corrected.clone().from_xyz()?, &output, job.bit_depth)?;

    let report = CorrectReport {
        command: "correct",
        method: job.method.name().to_string(),
        input: job.input.display().to_string(),
        output: Some(output.display().to_string()),
        angle_unit: angle_unit_name(job.degrees),
        matrix: fitted.matrix.0,
        source_white: fitted.source_white.map(ColorXYZ::to_array),
        dest_white: fitted.dest_white.map(ColorXYZ::to_array),
        regions: rows,
    };
    Ok(CorrectOutcome { report, corrected })
}

pub fn correct(job: &Job, report_path: Option<&Path>, out: &mut impl Write) -> Result<()> {
    let outcome = run_correct_job(job)?;
    print_correct(out, &outcome.report)?;
    if let Some(path) = report_path {
        write_json(&outcome.report, path)?;
    }
    Ok(())
}

pub fn correct_pair(
    job1: &Job,
    job2: &Job,
    report_path: Option<&Path>,
    out: &mut impl Write,
) -> Result<()> {
    // Both images must be corrected against the same benchmark set.
    for a in &job1.regions {
        let b = job2
            .region_named(&a.region.label)
            .with_context(|| format!("image 2 config is missing region '{}'", a.region.label))?;
        if a.role != b.role {
            bail!(
                "region '{}' has role {} in one config and {} in the other",
                a.region.label,
                a.role.name(),
                b.role.name()
            );
        }
        if a.benchmark != b.benchmark {
            bail!(
                "benchmark for region '{}' differs between the two configs",
                a.region.label
            );
        }
    }
    for b in &job2.regions {
        if job1.region_named(&b.region.label).is_none() {
            bail!("image 1 config is missing region '{}'", b.region.label);
        }
    }

    let outcome1 = run_correct_job(job1)?;
    let outcome2 = run_correct_job(job2)?;

    let degrees = job1.degrees;
    let mut cross = Vec::new();
    for jr in &job1.regions {
        let other = job2.region_named(&jr.region.label).expect("validated above");
        let mean1 = outcome1.corrected.region_mean(&jr.region)?;
        let mean2 = outcome2.corrected.region_mean(&other.region)?;
        let angular = match reproduction_angular_error(mean2, mean1) {
            Ok(v) => Some(convert_angle(v, degrees)),
            Err(CoreError::NonPositiveComponent { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let lab1 = xyz_to_lab(mean1, illuminant::D65)?;
        let lab2 = xyz_to_lab(mean2, illuminant::D65)?;
        let diff = ciede2000(&lab1, &lab2);
        cross.push(CrossRow {
            name: jr.region.label.clone(),
            angular_error: angular,
            delta_e: diff.delta_e,
            delta_h: diff.delta_h,
        });
    }

    let report = PairReport {
        command: "correct-pair",
        angle_unit: angle_unit_name(degrees),
        images: vec![outcome1.report, outcome2.report],
        cross,
    };
    print_pair(out, &report)?;
    if let Some(path) = report_path {
        write_json(&report, path)?;
    }
    Ok(())
}

pub fn eval(job: &Job, report_path: Option<&Path>, out: &mut impl Write) -> Result<()> {
    let encoded = load_image(&job.input)?;
    let xyz = encoded.to_xyz()?;
    let mut rows = Vec::with_capacity(job.regions.len());
    for jr in &job.regions {
        let metrics = evaluate_region(&xyz, &jr.region, jr.benchmark, illuminant::D65)?;
        let mean = xyz.region_mean(&jr.region)?;
        rows.push(EvalRow {
            name: jr.region.label.clone(),
            role: jr.role.name().to_string(),
            rect: [jr.region.x0, jr.region.y0, jr.region.w, jr.region.h],
            benchmark: jr.benchmark.to_array(),
            mean: mean.to_array(),
            angular_error: metrics.angular_error.map(|v| convert_angle(v, job.degrees)),
            delta_h: metrics.hue_difference,
        });
    }
    let report = EvalReport {
        command: "eval",
        input: job.input.display().to_string(),
        angle_unit: angle_unit_name(job.degrees),
        regions: rows,
    };
    print_eval(out, &report)?;
    if let Some(path) = report_path {
        write_json(&report, path)?;
    }
    Ok(())
}

pub fn synth(
    scene_job: &SceneJob,
    out_path: &Path,
    bit_depth: mcbal_core::BitDepth,
    out: &mut impl Write,
) -> Result<()> {
    let rendered = render(
        &scene_job.scene,
        &scene_job.cast,
        scene_job.noise_sigma,
        scene_job.seed,
    )?;
    let encoded = rendered.from_xyz()?;
    save_image(&encoded, out_path, bit_depth)?;
    writeln!(
        out,
        "rendered {}x{} scene with {} patches -> {}",
        scene_job.scene.width,
        scene_job.scene.height,
        scene_job.scene.patches.len(),
        out_path.display()
    )?;
    writeln!(out, "{:<16}  {:>16}  ground truth (XYZ)", "patch", "rect")?;
    for patch in &scene_job.scene.patches {
        let r = &patch.region;
        writeln!(
            out,
            "{:<16}  {:>16}  [{:.6}, {:.6}, {:.6}]",
            r.label,
            format!("{},{} {}x{}", r.x0, r.y0, r.w, r.h),
            patch.color.x,
            patch.color.y,
            patch.color.z
        )?;
    }
    Ok(())
}

/// Maps an error chain to the CLI exit code: 2 for numerical degeneracy,
/// 1 otherwise.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    let degenerate = err
        .chain()
        .any(|cause| {
            cause
                .downcast_ref::<CoreError>()
                .is_some_and(CoreError::is_degeneracy)
        });
    if degenerate {
        2
    } else {
        1
    }
}

/// Overrides shared by `correct`, `correct-pair` and `eval`.
pub fn overrides_from(
    method: Option<Method>,
    out: Option<PathBuf>,
    degrees: bool,
    bit_depth: Option<u8>,
    cond_threshold: Option<f64>,
) -> Overrides {
    Overrides {
        method,
        out,
        degrees,
        bit_depth,
        cond_threshold,
    }
}
