//! Evaluation metrics: reproduction angular error and the CIEDE2000 hue
//! difference ΔH.
//!
//! The angular error measures how far the componentwise ratio
//! `benchmark / adjusted` strays from the neutral axis `(1,1,1)`: it is
//! zero exactly when the adjusted color is a positive scalar multiple of
//! the benchmark. Values are radians.
//!
//! ΔH is the hue term `2·√(C′₁C′₂)·sin(Δh′/2)` of the CIEDE2000 formula,
//! reported as an absolute value. The full ΔE is implemented alongside so
//! the hue term can be validated against the standard verification data.

use crate::colorspace::{xyz_to_lab, ColorLab, ColorXYZ};
use crate::error::{Error, Result};
use crate::image::{ImageBuffer, Region};

/// Per-region metric pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub label: String,
    /// Radians; `None` when a non-positive mean component makes the ratio
    /// undefined.
    pub angular_error: Option<f64>,
    pub hue_difference: f64,
}

/// Angle, in radians, between the componentwise ratio
/// `benchmark / adjusted` and the neutral axis.
///
/// Both colors must have strictly positive components. Intensity-invariant:
/// scaling `adjusted` by any positive factor leaves the result unchanged.
pub fn reproduction_angular_error(adjusted: ColorXYZ, benchmark: ColorXYZ) -> Result<f64> {
    for c in [adjusted, benchmark] {
        if c.x <= 0.0 || c.y <= 0.0 || c.z <= 0.0 {
            return Err(Error::NonPositiveComponent {
                color: c.to_array(),
            });
        }
    }
    let r = [
        benchmark.x / adjusted.x,
        benchmark.y / adjusted.y,
        benchmark.z / adjusted.z,
    ];
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let u = 1.0 / 3f64.sqrt();
    // Half-angle form: stable down to zero angle, unlike plain acos of the
    // normalized dot product.
    let mut diff = 0.0;
    let mut sum = 0.0;
    for v in r {
        let vn = v / norm;
        diff += (vn - u) * (vn - u);
        sum += (vn + u) * (vn + u);
    }
    Ok(2.0 * diff.sqrt().atan2(sum.sqrt()))
}

/// The CIEDE2000 difference between two Lab colors, with the hue term
/// broken out. Parametric factors are fixed at `kL = kC = kH = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ciede2000 {
    /// Total color difference ΔE₀₀.
    pub delta_e: f64,
    /// Hue difference `|2·√(C′₁C′₂)·sin(Δh′/2)|`.
    pub delta_h: f64,
}

const POW25_7: f64 = 6103515625.0; // 25^7

fn hue_degrees(b: f64, a_prime: f64) -> f64 {
    if b == 0.0 && a_prime == 0.0 {
        return 0.0;
    }
    let h = b.atan2(a_prime).to_degrees();
    if h < 0.0 {
        h + 360.0
    } else {
        h
    }
}

/// Full CIEDE2000 computation following the standard implementation notes,
/// including the a′ rescaling, the ±360° hue branch rules and the rotation
/// term.
pub fn ciede2000(c1: &ColorLab, c2: &ColorLab) -> Ciede2000 {
    let chroma1 = (c1.a * c1.a + c1.b * c1.b).sqrt();
    let chroma2 = (c2.a * c2.a + c2.b * c2.b).sqrt();
    let chroma_mean = 0.5 * (chroma1 + chroma2);
    let cm7 = chroma_mean.powi(7);
    let g = 0.5 * (1.0 - (cm7 / (cm7 + POW25_7)).sqrt());

    let a1p = (1.0 + g) * c1.a;
    let a2p = (1.0 + g) * c2.a;
    let c1p = (a1p * a1p + c1.b * c1.b).sqrt();
    let c2p = (a2p * a2p + c2.b * c2.b).sqrt();
    let h1p = hue_degrees(c1.b, a1p);
    let h2p = hue_degrees(c2.b, a2p);

    let dl = c2.l - c1.l;
    let dc = c2p - c1p;

    let chroma_product = c1p * c2p;
    let dh_angle = if chroma_product == 0.0 {
        0.0
    } else {
        let d = h2p - h1p;
        if d.abs() <= 180.0 {
            d
        } else if d > 180.0 {
            d - 360.0
        } else {
            d + 360.0
        }
    };
    let dh = 2.0 * chroma_product.sqrt() * (dh_angle.to_radians() / 2.0).sin();

    let l_mean = 0.5 * (c1.l + c2.l);
    let cp_mean = 0.5 * (c1p + c2p);
    let h_mean = if chroma_product == 0.0 {
        h1p + h2p
    } else if (h1p - h2p).abs() <= 180.0 {
        0.5 * (h1p + h2p)
    } else if h1p + h2p < 360.0 {
        0.5 * (h1p + h2p + 360.0)
    } else {
        0.5 * (h1p + h2p - 360.0)
    };

    let t = 1.0 - 0.17 * (h_mean - 30.0).to_radians().cos()
        + 0.24 * (2.0 * h_mean).to_radians().cos()
        + 0.32 * (3.0 * h_mean + 6.0).to_radians().cos()
        - 0.20 * (4.0 * h_mean - 63.0).to_radians().cos();

    let l50 = (l_mean - 50.0) * (l_mean - 50.0);
    let sl = 1.0 + 0.015 * l50 / (20.0 + l50).sqrt();
    let sc = 1.0 + 0.045 * cp_mean;
    let sh = 1.0 + 0.015 * cp_mean * t;

    let cpm7 = cp_mean.powi(7);
    let rc = 2.0 * (cpm7 / (cpm7 + POW25_7)).sqrt();
    let dtheta = 30.0 * (-((h_mean - 275.0) / 25.0) * ((h_mean - 275.0) / 25.0)).exp();
    let rt = -rc * (2.0 * dtheta).to_radians().sin();

    let lt = dl / sl;
    let ct = dc / sc;
    let ht = dh / sh;
    Ciede2000 {
        delta_e: (lt * lt + ct * ct + ht * ht + rt * ct * ht).sqrt(),
        delta_h: dh.abs(),
    }
}

/// Total CIEDE2000 color difference.
pub fn ciede2000_delta_e(c1: &ColorLab, c2: &ColorLab) -> f64 {
    ciede2000(c1, c2).delta_e
}

/// CIEDE2000 hue difference `|ΔH|`. Neutral colors (zero chroma) give 0.
pub fn ciede2000_delta_h(adjusted: &ColorLab, benchmark: &ColorLab) -> f64 {
    ciede2000(adjusted, benchmark).delta_h
}

/// Evaluates a region of an XYZ image against a benchmark color: the
/// region mean is compared with both metrics. A non-positive mean
/// component leaves the angular error undefined (`None`) while ΔH is
/// still computed.
pub fn evaluate_region(
    image: &ImageBuffer,
    region: &Region,
    benchmark: ColorXYZ,
    white_for_lab: ColorXYZ,
) -> Result<MetricReport> {
    let mean = image.region_mean(region)?;
    let angular_error = match reproduction_angular_error(mean, benchmark) {
        Ok(v) => Some(v),
        Err(Error::NonPositiveComponent { .. }) => None,
        Err(e) => return Err(e),
    };
    let mean_lab = xyz_to_lab(mean, white_for_lab)?;
    let bench_lab = xyz_to_lab(benchmark, white_for_lab)?;
    Ok(MetricReport {
        label: region.label.clone(),
        angular_error,
        hue_difference: ciede2000_delta_h(&mean_lab, &bench_lab),
    })
}
