//! Color space conversions: encoded sRGB ↔ linear RGB ↔ XYZ ↔ CIELAB,
//! plus the chromatic-adaptation basis matrices and standard white points.
//!
//! Conventions used throughout the crate:
//! * XYZ is scaled so the reference white carries Y = 1 (not 100).
//! * The sRGB transfer function and the sRGB↔XYZ matrix use the IEC
//!   4-decimal constants; the XYZ→RGB direction is the numerical inverse
//!   of the forward matrix so the pair round-trips to machine precision.
//! * Out-of-gamut values pass through unclamped everywhere except the
//!   final encode step.

use std::str::FromStr;
use std::sync::LazyLock;

use crate::error::{Error, Result};
use crate::matrix::Matrix3;

/// A CIE 1931 tristimulus value, reference white at `y = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorXYZ {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ColorXYZ {
    pub const fn new(x: f64, y: f64, z: f64) -> ColorXYZ {
        ColorXYZ { x, y, z }
    }

    pub fn from_array(v: [f64; 3]) -> ColorXYZ {
        ColorXYZ::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn scaled(self, k: f64) -> ColorXYZ {
        ColorXYZ::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(self, other: ColorXYZ) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

/// A CIELAB value (`l` in 0–100 for in-gamut inputs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorLab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl ColorLab {
    pub const fn new(l: f64, a: f64, b: f64) -> ColorLab {
        ColorLab { l, a, b }
    }
}

/// Standard illuminant white points (Y = 1).
pub mod illuminant {
    use super::ColorXYZ;

    /// CIE standard illuminant D65, the default destination white.
    pub const D65: ColorXYZ = ColorXYZ::new(0.95047, 1.0, 1.08883);
    /// CIE standard illuminant D50.
    pub const D50: ColorXYZ = ColorXYZ::new(0.96422, 1.0, 0.82521);
    /// CIE standard illuminant A (incandescent).
    pub const A: ColorXYZ = ColorXYZ::new(1.09850, 1.0, 0.35585);
    /// Equal-energy illuminant E.
    pub const E: ColorXYZ = ColorXYZ::new(1.0, 1.0, 1.0);

    /// Looks up an illuminant by its conventional name (case-insensitive).
    pub fn by_name(name: &str) -> Option<ColorXYZ> {
        match name.to_ascii_uppercase().as_str() {
            "D65" => Some(D65),
            "D50" => Some(D50),
            "A" => Some(A),
            "E" => Some(E),
            _ => None,
        }
    }
}

// IEC 61966-2-1 transfer-function constants.
const SRGB_DECODE_THRESHOLD: f64 = 0.04045;
const SRGB_ENCODE_THRESHOLD: f64 = 0.0031308;
const SRGB_LINEAR_SLOPE: f64 = 12.92;

/// The 4-decimal sRGB → XYZ matrix (D65 reference white).
pub const SRGB_TO_XYZ: Matrix3 = Matrix3([
    [0.4124, 0.3576, 0.1805],
    [0.2126, 0.7152, 0.0722],
    [0.0193, 0.1192, 0.9505],
]);

static XYZ_TO_SRGB: LazyLock<Matrix3> =
    LazyLock::new(|| SRGB_TO_XYZ.inverse().expect("sRGB matrix is invertible"));

fn decode_channel(v: f64) -> f64 {
    if v <= SRGB_DECODE_THRESHOLD {
        v / SRGB_LINEAR_SLOPE
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// Decodes one gamma-encoded sRGB triple (channels in `[0, 1]`) to linear
/// light. Rejects out-of-range channels.
pub fn srgb_decode(encoded: [f64; 3]) -> Result<[f64; 3]> {
    for &v in &encoded {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ChannelOutOfRange { value: v });
        }
    }
    Ok(encoded.map(decode_channel))
}

/// Decode without the range check, for pixels already normalized by the
/// image loader.
pub(crate) fn srgb_decode_unchecked(encoded: [f64; 3]) -> [f64; 3] {
    encoded.map(decode_channel)
}

/// Encodes a linear-light triple to gamma-encoded sRGB. Inputs are clamped
/// to `[0, 1]` first, so this is a total function; it is the inverse of
/// [`srgb_decode`] on in-range values.
pub fn srgb_encode(linear: [f64; 3]) -> [f64; 3] {
    linear.map(|v| {
        let v = v.clamp(0.0, 1.0);
        if v <= SRGB_ENCODE_THRESHOLD {
            v * SRGB_LINEAR_SLOPE
        } else if v == 1.0 {
            // Keep white an exact fixed point; the power branch lands one
            // ulp off because 1.055 is not representable.
            1.0
        } else {
            (1.055 * v.powf(1.0 / 2.4) - 0.055).min(1.0)
        }
    })
}

/// Linear sRGB to XYZ (D65). `(1,1,1)` maps to the D65 white point.
pub fn linear_rgb_to_xyz(rgb: [f64; 3]) -> ColorXYZ {
    ColorXYZ::from_array(SRGB_TO_XYZ.mul_vec(rgb))
}

/// XYZ to linear sRGB. Out-of-gamut XYZ yields components outside `[0, 1]`,
/// returned unclamped; clamping is the encoder's job.
pub fn xyz_to_linear_rgb(c: ColorXYZ) -> [f64; 3] {
    XYZ_TO_SRGB.mul_vec(c.to_array())
}

/// Chromatic adaptation model: the basis in which an illuminant change is
/// treated as a diagonal gain change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdaptationModel {
    /// Scaling directly in XYZ; the basis is the identity.
    XyzScaling,
    /// Bradford cone response.
    Bradford,
    /// Von Kries with the Hunt-Pointer-Estevez cone fundamentals.
    VonKries,
}

const BRADFORD: Matrix3 = Matrix3([
    [0.8951, 0.2664, -0.1614],
    [-0.7502, 1.7135, 0.0367],
    [0.0389, -0.0685, 1.0296],
]);

// Hunt-Pointer-Estevez fundamentals normalized to D65, the matrix
// conventionally used for von Kries adaptation.
const VON_KRIES: Matrix3 = Matrix3([
    [0.40024, 0.70760, -0.08081],
    [-0.22630, 1.16532, 0.04570],
    [0.0, 0.0, 0.91822],
]);

static BRADFORD_INV: LazyLock<Matrix3> =
    LazyLock::new(|| BRADFORD.inverse().expect("Bradford basis is invertible"));
static VON_KRIES_INV: LazyLock<Matrix3> =
    LazyLock::new(|| VON_KRIES.inverse().expect("von Kries basis is invertible"));

impl AdaptationModel {
    pub const ALL: [AdaptationModel; 3] = [
        AdaptationModel::XyzScaling,
        AdaptationModel::Bradford,
        AdaptationModel::VonKries,
    ];

    /// The basis matrix `M_A` mapping XYZ into the model's gain space.
    pub fn basis(self) -> Matrix3 {
        match self {
            AdaptationModel::XyzScaling => Matrix3::IDENTITY,
            AdaptationModel::Bradford => BRADFORD,
            AdaptationModel::VonKries => VON_KRIES,
        }
    }

    /// Precomputed inverse of [`basis`](Self::basis).
    pub fn basis_inverse(self) -> Matrix3 {
        match self {
            AdaptationModel::XyzScaling => Matrix3::IDENTITY,
            AdaptationModel::Bradford => *BRADFORD_INV,
            AdaptationModel::VonKries => *VON_KRIES_INV,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AdaptationModel::XyzScaling => "xyz-scaling",
            AdaptationModel::Bradford => "bradford",
            AdaptationModel::VonKries => "von-kries",
        }
    }
}

impl FromStr for AdaptationModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<AdaptationModel, String> {
        match s.to_ascii_lowercase().as_str() {
            "xyz-scaling" | "xyz" => Ok(AdaptationModel::XyzScaling),
            "bradford" => Ok(AdaptationModel::Bradford),
            "von-kries" | "vonkries" => Ok(AdaptationModel::VonKries),
            other => Err(format!("unknown adaptation model '{other}'")),
        }
    }
}

// CIELAB f(t) split point (6/29)^3 and linear-branch slope 1/(3*(6/29)^2).
const LAB_DELTA: f64 = 6.0 / 29.0;
const LAB_T0: f64 = LAB_DELTA * LAB_DELTA * LAB_DELTA;

fn lab_f(t: f64) -> f64 {
    if t > LAB_T0 {
        t.cbrt()
    } else {
        t / (3.0 * LAB_DELTA * LAB_DELTA) + 4.0 / 29.0
    }
}

/// XYZ to CIELAB under the given reference white. The white must have
/// strictly positive components.
pub fn xyz_to_lab(c: ColorXYZ, white: ColorXYZ) -> Result<ColorLab> {
    if white.x <= 0.0 || white.y <= 0.0 || white.z <= 0.0 {
        return Err(Error::NonPositiveWhitePoint {
            white: white.to_array(),
        });
    }
    let fx = lab_f(c.x / white.x);
    let fy = lab_f(c.y / white.y);
    let fz = lab_f(c.z / white.z);
    Ok(ColorLab::new(
        116.0 * fy - 16.0,
        500.0 * (fx - fy),
        200.0 * (fy - fz),
    ))
}
