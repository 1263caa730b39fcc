//! Synthetic test scenes: patch grids rendered under a parameterized
//! illuminant cast.
//!
//! A cast is a diagonal gain applied in a chosen adaptation basis — the
//! exact inverse family of the white-balance correction — so both regimes
//! are constructible on demand: a cast expressible in the white-balance
//! model's basis (which white balancing inverts exactly for every color)
//! and a mismatched one (which it corrects only for the white point).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::colorspace::{linear_rgb_to_xyz, srgb_decode_unchecked, AdaptationModel, ColorXYZ};
use crate::error::{Error, Result};
use crate::image::{ColorSpace, ImageBuffer, Region};
use crate::matrix::Matrix3;

/// One patch: where it sits and its ground-truth (uncast) color.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub region: Region,
    pub color: ColorXYZ,
}

/// A flat scene of rectangular patches over a constant background.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchScene {
    pub width: u32,
    pub height: u32,
    pub background: ColorXYZ,
    pub patches: Vec<Patch>,
}

impl PatchScene {
    /// Checks canvas and patch geometry: positive canvas, every patch in
    /// bounds, patches mutually disjoint.
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidScene("canvas dimensions must be positive".into()));
        }
        for patch in &self.patches {
            patch
                .region
                .validate(self.width, self.height)
                .map_err(|e| Error::InvalidScene(e.to_string()))?;
        }
        for (i, a) in self.patches.iter().enumerate() {
            for b in &self.patches[i + 1..] {
                if a.region.overlaps(&b.region) {
                    return Err(Error::InvalidScene(format!(
                        "patches '{}' and '{}' overlap",
                        a.region.label, b.region.label
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn patch(&self, label: &str) -> Option<&Patch> {
        self.patches.iter().find(|p| p.region.label == label)
    }

    /// Builds the default 24-patch chart scene (4 rows × 6 columns).
    ///
    /// With `with_unknown_copy`, a second copy of the grid is laid out
    /// below the first with `_u`-suffixed labels: same ground-truth colors,
    /// intended to be left out of the fit.
    pub fn color_checker(patch_size: u32, gutter: u32, with_unknown_copy: bool) -> PatchScene {
        assert!(patch_size > 0, "patch size must be positive");
        let cols = 6u32;
        let rows = 4u32;
        let total_rows = if with_unknown_copy { rows * 2 } else { rows };
        let width = cols * patch_size + (cols + 1) * gutter;
        let height = total_rows * patch_size + (total_rows + 1) * gutter;
        let mut patches = Vec::new();
        let mut place = |grid_row: u32, suffix: &str, row_offset: u32| {
            for (i, (name, color)) in color_checker_colors().into_iter().enumerate() {
                let (r, c) = (i as u32 / cols, i as u32 % cols);
                let x0 = gutter + c * (patch_size + gutter);
                let y0 = gutter + (grid_row + r + row_offset) * (patch_size + gutter);
                patches.push(Patch {
                    region: Region::new(x0, y0, patch_size, patch_size, format!("{name}{suffix}")),
                    color,
                });
            }
        };
        place(0, "", 0);
        if with_unknown_copy {
            place(rows, "_u", 0);
        }
        // 18% gray background, neutral at D65 chromaticity.
        let background = crate::colorspace::illuminant::D65.scaled(0.18);
        PatchScene {
            width,
            height,
            background,
            patches,
        }
    }
}

/// Classic 24-patch color rendition chart, as (label, XYZ ground truth).
///
/// Derived from the widely published 8-bit sRGB values for the chart by
/// decoding through the sRGB transfer function and primaries.
pub fn color_checker_colors() -> [(&'static str, ColorXYZ); 24] {
    const SRGB: [(&str, [u8; 3]); 24] = [
        ("dark_skin", [115, 82, 68]),
        ("light_skin", [194, 150, 130]),
        ("blue_sky", [98, 122, 157]),
        ("foliage", [87, 108, 67]),
        ("blue_flower", [133, 128, 177]),
        ("bluish_green", [103, 189, 170]),
        ("orange", [214, 126, 44]),
        ("purplish_blue", [80, 91, 166]),
        ("moderate_red", [193, 90, 99]),
        ("purple", [94, 60, 108]),
        ("yellow_green", [157, 188, 64]),
        ("orange_yellow", [224, 163, 46]),
        ("blue", [56, 61, 150]),
        ("green", [70, 148, 73]),
        ("red", [175, 54, 60]),
        ("yellow", [231, 199, 31]),
        ("magenta", [187, 86, 149]),
        ("cyan", [8, 133, 161]),
        ("white", [243, 243, 242]),
        ("neutral_8", [200, 200, 200]),
        ("neutral_65", [160, 160, 160]),
        ("neutral_5", [122, 122, 121]),
        ("neutral_35", [85, 85, 85]),
        ("black", [52, 52, 52]),
    ];
    SRGB.map(|(name, rgb)| {
        let encoded = rgb.map(|v| v as f64 / 255.0);
        (name, linear_rgb_to_xyz(srgb_decode_unchecked(encoded)))
    })
}

/// An illuminant cast: diagonal gains applied in an adaptation basis.
/// Gains of `(1, 1, 1)` are the no-cast identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminantCast {
    pub model: AdaptationModel,
    pub gains: [f64; 3],
}

impl IlluminantCast {
    pub fn new(model: AdaptationModel, gains: [f64; 3]) -> Result<IlluminantCast> {
        if gains.iter().any(|g| !g.is_finite() || *g <= 0.0) {
            return Err(Error::InvalidScene(format!(
                "cast gains {gains:?} must be positive and finite"
            )));
        }
        Ok(IlluminantCast { model, gains })
    }

    pub fn identity(model: AdaptationModel) -> IlluminantCast {
        IlluminantCast {
            model,
            gains: [1.0, 1.0, 1.0],
        }
    }

    /// The cast as a single XYZ-space matrix: `M_A⁻¹ · diag(gains) · M_A`.
    /// Unit gains short-circuit to the exact identity.
    pub fn matrix(&self) -> Matrix3 {
        if self.gains == [1.0, 1.0, 1.0] {
            return Matrix3::IDENTITY;
        }
        self.model.basis_inverse() * Matrix3::diagonal(self.gains) * self.model.basis()
    }
}

/// Renders the scene under the cast into an XYZ buffer.
///
/// Each pixel is the cast applied to the patch (or background) ground
/// truth, plus optional zero-mean Gaussian noise truncated at 0.
/// Deterministic for a given `(scene, cast, noise_sigma, seed)`.
pub fn render(
    scene: &PatchScene,
    cast: &IlluminantCast,
    noise_sigma: f64,
    seed: u64,
) -> Result<ImageBuffer> {
    scene.validate()?;
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidScene(format!(
            "noise sigma {noise_sigma} must be finite and non-negative"
        )));
    }
    let m = cast.matrix();
    let mut img = ImageBuffer::filled(
        scene.width,
        scene.height,
        ColorSpace::Xyz,
        m.mul_vec(scene.background.to_array()),
    );
    for patch in &scene.patches {
        let value = m.mul_vec(patch.color.to_array());
        let r = &patch.region;
        for y in r.y0..r.y0 + r.h {
            for x in r.x0..r.x0 + r.w {
                img.set_pixel(x, y, value);
            }
        }
    }
    if noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_sigma)
            .map_err(|e| Error::InvalidScene(format!("noise sigma: {e}")))?;
        for y in 0..scene.height {
            for x in 0..scene.width {
                let mut p = img.pixel(x, y);
                for channel in &mut p {
                    *channel = (*channel + normal.sample(&mut rng)).max(0.0);
                }
                img.set_pixel(x, y, p);
            }
        }
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{apply_matrix, white_balance_matrix};

    fn small_scene() -> PatchScene {
        PatchScene {
            width: 8,
            height: 4,
            background: ColorXYZ::new(0.2, 0.2, 0.2),
            patches: vec![
                Patch {
                    region: Region::new(0, 0, 3, 3, "a"),
                    color: ColorXYZ::new(0.3, 0.3, 0.3),
                },
                Patch {
                    region: Region::new(4, 0, 3, 3, "b"),
                    color: ColorXYZ::new(0.5, 0.2, 0.1),
                },
            ],
        }
    }

    #[test]
    fn identity_cast_reproduces_ground_truth() {
        let scene = small_scene();
        let img = render(&scene, &IlluminantCast::identity(AdaptationModel::Bradford), 0.0, 0)
            .unwrap();
        assert_eq!(img.pixel(1, 1), [0.3, 0.3, 0.3]);
        assert_eq!(img.pixel(5, 1), [0.5, 0.2, 0.1]);
        assert_eq!(img.pixel(3, 3), [0.2, 0.2, 0.2]);
    }

    #[test]
    fn xyz_scaling_cast_acts_diagonally() {
        let scene = small_scene();
        let cast = IlluminantCast::new(AdaptationModel::XyzScaling, [2.0, 1.0, 1.0]).unwrap();
        let img = render(&scene, &cast, 0.0, 0).unwrap();
        assert_eq!(img.pixel(1, 1), [0.6, 0.3, 0.3]);
    }

    #[test]
    fn wb_from_cast_white_inverts_matching_cast() {
        // When the WB model matches the cast basis, the correction built
        // from any white point recovers every color exactly.
        let scene = small_scene();
        let cast = IlluminantCast::new(AdaptationModel::Bradford, [1.3, 1.0, 0.7]).unwrap();
        let img = render(&scene, &cast, 0.0, 0).unwrap();
        let white_gt = ColorXYZ::new(0.9, 0.95, 1.0);
        let cast_white = ColorXYZ::from_array(cast.matrix().mul_vec(white_gt.to_array()));
        let wb = white_balance_matrix(cast_white, white_gt, AdaptationModel::Bradford).unwrap();
        for patch in &scene.patches {
            let observed = ColorXYZ::from_array(img.pixel(patch.region.x0, patch.region.y0));
            let recovered = apply_matrix(&wb, observed);
            assert!(
                recovered.max_abs_diff(patch.color) < 1e-10,
                "{}: {recovered:?}",
                patch.region.label
            );
        }
    }

    #[test]
    fn overlapping_patches_rejected() {
        let mut scene = small_scene();
        scene.patches[1].region = Region::new(2, 0, 3, 3, "b");
        assert!(matches!(
            render(&scene, &IlluminantCast::identity(AdaptationModel::XyzScaling), 0.0, 0),
            Err(Error::InvalidScene(_))
        ));
    }

    #[test]
    fn render_is_deterministic() {
        let scene = small_scene();
        let cast = IlluminantCast::new(AdaptationModel::Bradford, [1.2, 0.9, 0.8]).unwrap();
        let a = render(&scene, &cast, 0.01, 1234).unwrap();
        let b = render(&scene, &cast, 0.01, 1234).unwrap();
        assert_eq!(a, b);
        let c = render(&scene, &cast, 0.01, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_is_truncated_at_zero() {
        let scene = PatchScene {
            width: 64,
            height: 64,
            background: ColorXYZ::new(0.0, 0.0, 0.0),
            patches: vec![],
        };
        let img = render(
            &scene,
            &IlluminantCast::identity(AdaptationModel::XyzScaling),
            0.05,
            7,
        )
        .unwrap();
        assert!(img.pixels().iter().flatten().all(|v| *v >= 0.0));
    }

    #[test]
    fn rejects_nonpositive_gains() {
        assert!(IlluminantCast::new(AdaptationModel::Bradford, [1.0, 0.0, 1.0]).is_err());
        assert!(IlluminantCast::new(AdaptationModel::Bradford, [1.0, -0.5, 1.0]).is_err());
    }

    #[test]
    fn chart_has_24_disjoint_patches() {
        let scene = PatchScene::color_checker(16, 4, false);
        assert_eq!(scene.patches.len(), 24);
        scene.validate().unwrap();
        let white = scene.patch("white").unwrap();
        // Chart white is near-neutral and bright.
        assert!(white.color.y > 0.85);
    }

    #[test]
    fn chart_unknown_copy_doubles_patches() {
        let scene = PatchScene::color_checker(16, 4, true);
        assert_eq!(scene.patches.len(), 48);
        scene.validate().unwrap();
        let known = scene.patch("red").unwrap();
        let unknown = scene.patch("red_u").unwrap();
        assert_eq!(known.color, unknown.color);
        assert_ne!(known.region, unknown.region);
    }
}
