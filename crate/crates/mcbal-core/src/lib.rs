//! Color correction via 3×3 transforms in XYZ space.
//!
//! Two correction families are provided:
//!
//! * **White balance** ([`balance::white_balance_matrix`]): maps a source
//!   white point onto a destination white point through a diagonal gain in
//!   a chromatic-adaptation basis (XYZ scaling, Bradford, or von Kries).
//!   Exact for white; other colors shift only approximately.
//! * **Multi-color balance** ([`balance::multi_color_balance_matrix`]):
//!   maps three user-chosen source colors *exactly* onto three benchmark
//!   colors by solving `M = D·S⁻¹` for the 3×3 column matrices of the two
//!   color triples.
//!
//! Around the kernel sit color space conversions ([`colorspace`]), image
//! I/O with region sampling ([`image`]), the two evaluation metrics —
//! reproduction angular error and CIEDE2000 ΔH ([`metrics`]) — and a
//! deterministic synthetic scene renderer for end-to-end verification
//! ([`synth`]).

pub mod balance;
pub mod colorspace;
pub mod error;
pub mod image;
pub mod matrix;
pub mod metrics;
pub mod synth;

pub use balance::{
    apply_matrix, cone_response, multi_color_balance_matrix, multi_color_balance_matrix_with,
    white_balance_matrix, ColorTriple, ConeResponse, DEFAULT_CONDITION_THRESHOLD,
};
pub use colorspace::{illuminant, AdaptationModel, ColorLab, ColorXYZ};
pub use error::{Error, Result};
pub use image::{load_image, save_image, BitDepth, ColorSpace, ImageBuffer, Region};
pub use matrix::Matrix3;
pub use metrics::{
    ciede2000, ciede2000_delta_e, ciede2000_delta_h, evaluate_region,
    reproduction_angular_error, Ciede2000, MetricReport,
};
pub use synth::{render, IlluminantCast, Patch, PatchScene};
