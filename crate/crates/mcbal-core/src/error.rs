//! Error type shared across the crate.

use crate::image::ColorSpace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An encoded sRGB channel fell outside `[0, 1]`.
    #[error("channel value {value} outside [0, 1]")]
    ChannelOutOfRange { value: f64 },

    /// A Lab reference white had a non-positive component.
    #[error("reference white {white:?} must have positive components")]
    NonPositiveWhitePoint { white: [f64; 3] },

    /// A white point mapped to a cone response with a near-zero component,
    /// which would act as a divisor in the adaptation diagonal.
    #[error("degenerate white point: cone response {cone:?} has a component below {eps:.0e}")]
    DegenerateWhitePoint { cone: [f64; 3], eps: f64 },

    /// The three source target colors are linearly dependent (or close
    /// enough that the fit would amplify noise beyond use).
    #[error(
        "target colors are colinear: source matrix condition number {condition:.3e} exceeds {threshold:.3e}"
    )]
    ColinearTargetColors { condition: f64, threshold: f64 },

    /// The angular error ratio is undefined for non-positive components.
    #[error("color {color:?} has a non-positive component; ratio to benchmark undefined")]
    NonPositiveComponent { color: [f64; 3] },

    /// An operation was handed a buffer in the wrong color space.
    #[error("buffer is in {found:?} space, expected {expected:?}")]
    WrongColorSpace {
        expected: ColorSpace,
        found: ColorSpace,
    },

    /// A sampling region does not fit the image it was bound to.
    #[error("region '{label}' ({x0},{y0} {w}x{h}) out of bounds for {width}x{height} image")]
    RegionOutOfBounds {
        label: String,
        x0: u32,
        y0: u32,
        w: u32,
        h: u32,
        width: u32,
        height: u32,
    },

    /// A region with zero extent.
    #[error("region '{label}' is empty")]
    EmptyRegion { label: String },

    /// File contents not recognized as PNG or binary PPM, or an
    /// unsupported pixel layout inside a recognized container.
    #[error("unsupported image: {0}")]
    UnsupportedImage(String),

    /// A recognized container with a malformed or truncated header/payload.
    #[error("corrupt image: {0}")]
    CorruptImage(String),

    /// Scene description failed validation (overlapping patches, zero
    /// canvas, out-of-range gains and the like).
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("png decode error: {0}")]
    PngDecode(#[from] png::DecodingError),

    #[error("png encode error: {0}")]
    PngEncode(#[from] png::EncodingError),
}

impl Error {
    /// True for the numerical-degeneracy family, which the CLI reports with
    /// a dedicated exit code.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::DegenerateWhitePoint { .. } | Error::ColinearTargetColors { .. }
        )
    }
}
