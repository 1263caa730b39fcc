//! Construction of the two correction matrices.
//!
//! White balance maps one white point onto another by a diagonal gain in a
//! chromatic-adaptation basis:
//!
//! ```text
//! M_WB = M_A⁻¹ · diag(ρ_D/ρ_S, γ_D/γ_S, β_D/β_S) · M_A
//! ```
//!
//! Multi-color balance instead fixes three arbitrary colors at once. With
//! the three source colors as the columns of `S` and the three benchmark
//! colors as the columns of `D`,
//!
//! ```text
//! M_MCB = D · S⁻¹
//! ```
//!
//! maps every source column exactly onto its benchmark column whenever `S`
//! is invertible. Both matrices are plain 3×3 linear maps applied per
//! pixel; callers fuse any pre/post conversions into a single matrix
//! before touching image data.

use crate::colorspace::{AdaptationModel, ColorXYZ};
use crate::error::{Error, Result};
use crate::matrix::Matrix3;

/// Coordinates of a white point in an adaptation basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeResponse {
    pub rho: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl ConeResponse {
    pub fn to_array(self) -> [f64; 3] {
        [self.rho, self.gamma, self.beta]
    }
}

/// An ordered set of three colors, used as the columns of `S` or `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorTriple {
    pub c1: ColorXYZ,
    pub c2: ColorXYZ,
    pub c3: ColorXYZ,
}

impl ColorTriple {
    pub fn new(c1: ColorXYZ, c2: ColorXYZ, c3: ColorXYZ) -> ColorTriple {
        ColorTriple { c1, c2, c3 }
    }

    /// The column matrix `(c1 | c2 | c3)`.
    pub fn as_matrix(&self) -> Matrix3 {
        Matrix3::from_columns(self.c1.to_array(), self.c2.to_array(), self.c3.to_array())
    }

    pub fn colors(&self) -> [ColorXYZ; 3] {
        [self.c1, self.c2, self.c3]
    }

    /// 1-norm condition number of the column matrix.
    pub fn condition_number(&self) -> f64 {
        self.as_matrix().condition_one()
    }
}

/// Cone-response components below this magnitude make the white-balance
/// gain ratios blow up and are rejected.
pub const DEGENERATE_CONE_EPS: f64 = 1e-12;

/// Condition-number cutoff above which a source triple is treated as
/// colinear. Exposed as a knob on [`multi_color_balance_matrix_with`].
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e8;

/// Projects a white point into the model's gain space: `M_A · white`.
pub fn cone_response(white: ColorXYZ, model: AdaptationModel) -> Result<ConeResponse> {
    let [rho, gamma, beta] = model.basis().mul_vec(white.to_array());
    let cone = [rho, gamma, beta];
    if cone.iter().any(|v| v.abs() < DEGENERATE_CONE_EPS) {
        return Err(Error::DegenerateWhitePoint {
            cone,
            eps: DEGENERATE_CONE_EPS,
        });
    }
    Ok(ConeResponse { rho, gamma, beta })
}

/// Builds the white-balance matrix mapping `source_white` to `dest_white`
/// under the given adaptation model.
pub fn white_balance_matrix(
    source_white: ColorXYZ,
    dest_white: ColorXYZ,
    model: AdaptationModel,
) -> Result<Matrix3> {
    let s = cone_response(source_white, model)?;
    let d = cone_response(dest_white, model)?;
    let gains = Matrix3::diagonal([d.rho / s.rho, d.gamma / s.gamma, d.beta / s.beta]);
    Ok(model.basis_inverse() * gains * model.basis())
}

/// Builds the multi-color balance matrix `D·S⁻¹` with the default
/// colinearity threshold.
///
/// The matrix maps each source color exactly onto its benchmark color. Only
/// `S` needs to be invertible: a rank-deficient `D` still yields a
/// well-defined (singular) matrix and is not rejected here; callers that
/// want to surface it can inspect `dests.condition_number()`.
pub fn multi_color_balance_matrix(sources: &ColorTriple, dests: &ColorTriple) -> Result<Matrix3> {
    multi_color_balance_matrix_with(sources, dests, DEFAULT_CONDITION_THRESHOLD)
}

/// [`multi_color_balance_matrix`] with an explicit condition-number
/// threshold for rejecting near-colinear source triples.
pub fn multi_color_balance_matrix_with(
    sources: &ColorTriple,
    dests: &ColorTriple,
    condition_threshold: f64,
) -> Result<Matrix3> {
    let s = sources.as_matrix();
    let condition = s.condition_one();
    if !condition.is_finite() || condition >= condition_threshold {
        return Err(Error::ColinearTargetColors {
            condition,
            threshold: condition_threshold,
        });
    }
    let s_inv = s.inverse().expect("finite condition number implies invertible");
    Ok(dests.as_matrix() * s_inv)
}

/// Applies a correction matrix to one color: `M·p`. The result may leave
/// the non-negative octant; gamut handling happens downstream at encode
/// time.
pub fn apply_matrix(m: &Matrix3, p: ColorXYZ) -> ColorXYZ {
    ColorXYZ::from_array(m.mul_vec(p.to_array()))
}
