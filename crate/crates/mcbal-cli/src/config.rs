//! TOML job and scene configuration: schema, validation, and resolution
//! into core types.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use mcbal_core::colorspace::{illuminant, AdaptationModel, ColorXYZ};
use mcbal_core::image::{BitDepth, Region};
use mcbal_core::synth::{IlluminantCast, Patch, PatchScene};
use mcbal_core::DEFAULT_CONDITION_THRESHOLD;

/// Correction method selected in a job config or via `--method`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    WbXyz,
    WbBradford,
    WbVonkries,
    Mcb,
}

impl Method {
    pub fn adaptation_model(self) -> Option<AdaptationModel> {
        match self {
            Method::WbXyz => Some(AdaptationModel::XyzScaling),
            Method::WbBradford => Some(AdaptationModel::Bradford),
            Method::WbVonkries => Some(AdaptationModel::VonKries),
            Method::Mcb => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::WbXyz => "wb-xyz",
            Method::WbBradford => "wb-bradford",
            Method::WbVonkries => "wb-vonkries",
            Method::Mcb => "mcb",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Method, String> {
        match s.to_ascii_lowercase().as_str() {
            "wb-xyz" => Ok(Method::WbXyz),
            "wb-bradford" => Ok(Method::WbBradford),
            "wb-vonkries" => Ok(Method::WbVonkries),
            "mcb" => Ok(Method::Mcb),
            other => Err(format!(
                "unknown method '{other}' (expected wb-xyz, wb-bradford, wb-vonkries or mcb)"
            )),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Role a region plays in the workflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Target1,
    Target2,
    Target3,
    White,
    Eval,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Target1 => "target1",
            Role::Target2 => "target2",
            Role::Target3 => "target3",
            Role::White => "white",
            Role::Eval => "eval",
        }
    }
}

/// A benchmark color: either an XYZ triple or a named standard illuminant.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BenchmarkValue {
    Xyz([f64; 3]),
    Named(String),
}

impl BenchmarkValue {
    pub fn resolve(&self) -> Result<ColorXYZ> {
        match self {
            BenchmarkValue::Xyz(v) => Ok(ColorXYZ::from_array(*v)),
            BenchmarkValue::Named(name) => illuminant::by_name(name)
                .with_context(|| format!("unknown illuminant '{name}'")),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionEntry {
    name: String,
    role: Role,
    /// `[x0, y0, w, h]` in pixels.
    rect: [u32; 4],
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsEntry {
    degrees: Option<bool>,
    bit_depth: Option<u8>,
    cond_threshold: Option<f64>,
}

/// On-disk schema of a correction/evaluation job.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobFile {
    input: PathBuf,
    output: Option<PathBuf>,
    method: Option<Method>,
    #[serde(default)]
    options: OptionsEntry,
    #[serde(default, rename = "region")]
    regions: Vec<RegionEntry>,
    #[serde(default)]
    benchmarks: BTreeMap<String, BenchmarkValue>,
}

/// CLI-side overrides applied on top of a job file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub method: Option<Method>,
    pub out: Option<PathBuf>,
    pub degrees: bool,
    pub bit_depth: Option<u8>,
    pub cond_threshold: Option<f64>,
}

/// A region bound to its role and benchmark color.
#[derive(Debug, Clone)]
pub struct JobRegion {
    pub region: Region,
    pub role: Role,
    pub benchmark: ColorXYZ,
}

/// A fully validated job ready to run.
#[derive(Debug, Clone)]
pub struct Job {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub method: Method,
    pub regions: Vec<JobRegion>,
    pub degrees: bool,
    pub bit_depth: BitDepth,
    pub cond_threshold: f64,
}

impl Job {
    pub fn regions_with_role(&self, role: Role) -> impl Iterator<Item = &JobRegion> {
        self.regions.iter().filter(move |r| r.role == role)
    }

    pub fn region_named(&self, name: &str) -> Option<&JobRegion> {
        self.regions.iter().find(|r| r.region.label == name)
    }

    /// The single region with the given role; errors when absent or
    /// duplicated.
    pub fn unique_region(&self, role: Role) -> Result<&JobRegion> {
        let mut found = self.regions_with_role(role);
        let first = found
            .next()
            .with_context(|| format!("method {} requires a '{}' region", self.method, role.name()))?;
        if found.next().is_some() {
            bail!("role '{}' declared more than once", role.name());
        }
        Ok(first)
    }
}

fn parse_bit_depth(raw: Option<u8>) -> Result<BitDepth> {
    match raw {
        None => Ok(BitDepth::Sixteen),
        Some(8) => Ok(BitDepth::Eight),
        Some(16) => Ok(BitDepth::Sixteen),
        Some(other) => bail!("bit depth must be 8 or 16, got {other}"),
    }
}

/// Loads and validates a job config, applying CLI overrides. `need_method`
/// distinguishes `correct` (method required) from `eval` (method ignored).
pub fn load_job(path: &Path, overrides: &Overrides, need_method: bool) -> Result<Job> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let file: JobFile =
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;

    let method = match (overrides.method, file.method) {
        (Some(m), _) => m,
        (None, Some(m)) => m,
        (None, None) if need_method => {
            bail!("no method: set `method` in the config or pass --method")
        }
        (None, None) => Method::Mcb, // ignored by eval
    };

    let mut regions = Vec::with_capacity(file.regions.len());
    for entry in &file.regions {
        if regions
            .iter()
            .any(|r: &JobRegion| r.region.label == entry.name)
        {
            bail!("region '{}' declared twice", entry.name);
        }
        let [x0, y0, w, h] = entry.rect;
        let benchmark = match file.benchmarks.get(&entry.name) {
            Some(value) => value
                .resolve()
                .with_context(|| format!("benchmark for region '{}'", entry.name))?,
            // The destination white defaults to D65.
            None if entry.role == Role::White => illuminant::D65,
            None => bail!(
                "region '{}' ({}) has no benchmark color",
                entry.name,
                entry.role.name()
            ),
        };
        regions.push(JobRegion {
            region: Region::new(x0, y0, w, h, entry.name.clone()),
            role: entry.role,
            benchmark,
        });
    }
    for name in file.benchmarks.keys() {
        if !regions.iter().any(|r| &r.region.label == name) {
            bail!("benchmark '{name}' does not match any region");
        }
    }

    let job = Job {
        input: file.input,
        output: overrides.out.clone().or(file.output),
        method,
        regions,
        degrees: overrides.degrees || file.options.degrees.unwrap_or(false),
        bit_depth: parse_bit_depth(overrides.bit_depth.or(file.options.bit_depth))?,
        cond_threshold: overrides
            .cond_threshold
            .or(file.options.cond_threshold)
            .unwrap_or(DEFAULT_CONDITION_THRESHOLD),
    };

    if need_method {
        match job.method {
            Method::Mcb => {
                for role in [Role::Target1, Role::Target2, Role::Target3] {
                    job.unique_region(role)?;
                }
            }
            _ => {
                job.unique_region(Role::White)?;
            }
        }
    }
    Ok(job)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartEntry {
    #[serde(default = "default_patch_size")]
    patch_size: u32,
    #[serde(default = "default_gutter")]
    gutter: u32,
    #[serde(default)]
    unknown_copy: bool,
}

fn default_patch_size() -> u32 {
    32
}

fn default_gutter() -> u32 {
    8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchEntry {
    name: String,
    rect: [u32; 4],
    color: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CastEntry {
    model: String,
    gains: [f64; 3],
}

/// On-disk schema of a synthetic scene.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    width: Option<u32>,
    height: Option<u32>,
    background: Option<[f64; 3]>,
    chart: Option<ChartEntry>,
    #[serde(default, rename = "patch")]
    patches: Vec<PatchEntry>,
    cast: Option<CastEntry>,
    #[serde(default)]
    noise_sigma: f64,
    #[serde(default)]
    seed: u64,
}

/// A validated scene job.
#[derive(Debug)]
pub struct SceneJob {
    pub scene: PatchScene,
    pub cast: IlluminantCast,
    pub noise_sigma: f64,
    pub seed: u64,
}

pub fn load_scene(path: &Path, seed_override: Option<u64>) -> Result<SceneJob> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading scene config {}", path.display()))?;
    let file: SceneFile =
        toml::from_str(&text).with_context(|| format!("parsing scene config {}", path.display()))?;

    let scene = match (&file.chart, file.patches.is_empty()) {
        (Some(chart), true) => {
            let mut scene =
                PatchScene::color_checker(chart.patch_size, chart.gutter, chart.unknown_copy);
            if let Some(bg) = file.background {
                scene.background = ColorXYZ::from_array(bg);
            }
            scene
        }
        (None, false) => {
            let width = file.width.context("explicit scenes need `width`")?;
            let height = file.height.context("explicit scenes need `height`")?;
            let background = ColorXYZ::from_array(
                file.background
                    .unwrap_or_else(|| illuminant::D65.scaled(0.18).to_array()),
            );
            let patches = file
                .patches
                .iter()
                .map(|p| {
                    let [x0, y0, w, h] = p.rect;
                    Patch {
                        region: Region::new(x0, y0, w, h, p.name.clone()),
                        color: ColorXYZ::from_array(p.color),
                    }
                })
                .collect();
            PatchScene {
                width,
                height,
                background,
                patches,
            }
        }
        (Some(_), false) => bail!("scene declares both [chart] and [[patch]]; pick one"),
        (None, true) => bail!("scene declares neither [chart] nor any [[patch]]"),
    };

    let cast = match &file.cast {
        Some(entry) => {
            let model: AdaptationModel = entry
                .model
                .parse()
                .map_err(|e: String| anyhow::anyhow!(e))
                .with_context(|| "cast model".to_string())?;
            IlluminantCast::new(model, entry.gains)?
        }
        None => IlluminantCast::identity(AdaptationModel::XyzScaling),
    };

    Ok(SceneJob {
        scene,
        cast,
        noise_sigma: file.noise_sigma,
        seed: seed_override.unwrap_or(file.seed),
    })
}
