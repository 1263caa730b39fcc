//! Image buffers, file I/O (PNG and binary PPM), region sampling and
//! whole-image application of a correction matrix.
//!
//! Pixels are `[f64; 3]` throughout. Every buffer carries a color-space
//! tag that each transform updates, so a buffer can never silently be
//! interpreted in the wrong space. Correction happens in unbounded XYZ;
//! values are clamped exactly once, at sRGB encode time.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::colorspace::{linear_rgb_to_xyz, srgb_decode_unchecked, srgb_encode, xyz_to_linear_rgb, ColorXYZ};
use crate::error::{Error, Result};
use crate::matrix::Matrix3;

/// What the three channels of a buffer mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSpace {
    /// Gamma-encoded sRGB in `[0, 1]`.
    EncodedSrgb,
    /// Linear-light sRGB.
    LinearRgb,
    /// CIE XYZ, reference white at Y = 1.
    Xyz,
}

/// Output quantization depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

/// An axis-aligned sampling rectangle in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub x0: u32,
    pub y0: u32,
    pub w: u32,
    pub h: u32,
    pub label: String,
}

impl Region {
    pub fn new(x0: u32, y0: u32, w: u32, h: u32, label: impl Into<String>) -> Region {
        Region {
            x0,
            y0,
            w,
            h,
            label: label.into(),
        }
    }

    /// Checks the region is non-empty and fits inside the given dimensions.
    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(Error::EmptyRegion {
                label: self.label.clone(),
            });
        }
        let fits_x = self.x0.checked_add(self.w).is_some_and(|x| x <= width);
        let fits_y = self.y0.checked_add(self.h).is_some_and(|y| y <= height);
        if !fits_x || !fits_y {
            return Err(Error::RegionOutOfBounds {
                label: self.label.clone(),
                x0: self.x0,
                y0: self.y0,
                w: self.w,
                h: self.h,
                width,
                height,
            });
        }
        Ok(())
    }

    /// True if two regions share at least one pixel.
    pub fn overlaps(&self, other: &Region) -> bool {
        self.x0 < other.x0 + other.w
            && other.x0 < self.x0 + self.w
            && self.y0 < other.y0 + other.h
            && other.y0 < self.y0 + self.h
    }
}

// Minimum pixels per rayon task; keeps scheduling overhead negligible on
// megapixel buffers without starving wide machines.
const PAR_MIN_PIXELS: usize = 1 << 16;

/// A width × height grid of three-channel pixels with explicit channel
/// semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    space: ColorSpace,
    data: Vec<[f64; 3]>,
}

impl ImageBuffer {
    /// Creates a constant-filled buffer. Panics on zero dimensions.
    pub fn filled(width: u32, height: u32, space: ColorSpace, fill: [f64; 3]) -> ImageBuffer {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        ImageBuffer {
            width,
            height,
            space,
            data: vec![fill; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [f64; 3] {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, value: [f64; 3]) {
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    fn expect_space(&self, expected: ColorSpace) -> Result<()> {
        if self.space != expected {
            return Err(Error::WrongColorSpace {
                expected,
                found: self.space,
            });
        }
        Ok(())
    }

    /// Converts an encoded-sRGB (or linear-RGB) buffer to XYZ.
    ///
    /// Consumes the buffer and transforms pixels in place; like the other
    /// whole-image transforms, the result is bit-identical regardless of
    /// worker-thread count since pixels are independent.
    pub fn to_xyz(mut self) -> Result<ImageBuffer> {
        match self.space {
            ColorSpace::EncodedSrgb => {
                self.data
                    .par_iter_mut()
                    .with_min_len(PAR_MIN_PIXELS)
                    .for_each(|p| *p = linear_rgb_to_xyz(srgb_decode_unchecked(*p)).to_array());
            }
            ColorSpace::LinearRgb => {
                self.data
                    .par_iter_mut()
                    .with_min_len(PAR_MIN_PIXELS)
                    .for_each(|p| *p = linear_rgb_to_xyz(*p).to_array());
            }
            ColorSpace::Xyz => {
                return Err(Error::WrongColorSpace {
                    expected: ColorSpace::EncodedSrgb,
                    found: ColorSpace::Xyz,
                })
            }
        }
        self.space = ColorSpace::Xyz;
        Ok(self)
    }

    /// Converts an XYZ buffer back to encoded sRGB. Out-of-gamut values
    /// are clamped here, and only here.
    pub fn from_xyz(mut self) -> Result<ImageBuffer> {
        self.expect_space(ColorSpace::Xyz)?;
        self.data
            .par_iter_mut()
            .with_min_len(PAR_MIN_PIXELS)
            .for_each(|p| *p = srgb_encode(xyz_to_linear_rgb(ColorXYZ::from_array(*p))));
        self.space = ColorSpace::EncodedSrgb;
        Ok(self)
    }

    /// Arithmetic mean of a region of an XYZ buffer.
    pub fn region_mean(&self, region: &Region) -> Result<ColorXYZ> {
        self.expect_space(ColorSpace::Xyz)?;
        region.validate(self.width, self.height)?;
        let mut sum = [0.0f64; 3];
        for y in region.y0..region.y0 + region.h {
            let row_start = y as usize * self.width as usize + region.x0 as usize;
            for p in &self.data[row_start..row_start + region.w as usize] {
                sum[0] += p[0];
                sum[1] += p[1];
                sum[2] += p[2];
            }
        }
        let n = (region.w as u64 * region.h as u64) as f64;
        Ok(ColorXYZ::new(sum[0] / n, sum[1] / n, sum[2] / n))
    }

    /// Applies a single fused 3×3 correction to every pixel of an XYZ
    /// buffer. Consumes the buffer (the transform runs in place; no copy
    /// of the pixel data is made). Output is bit-identical regardless of
    /// worker-thread count: each output pixel depends only on its own
    /// input pixel.
    pub fn apply_correction(mut self, m: &Matrix3) -> Result<ImageBuffer> {
        self.expect_space(ColorSpace::Xyz)?;
        self.data
            .par_iter_mut()
            .with_min_len(PAR_MIN_PIXELS)
            .for_each(|p| *p = m.mul_vec(*p));
        Ok(self)
    }
}

const PNG_MAGIC: [u8; 8] = [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

/// Loads a PNG (8/16-bit RGB) or binary PPM (P6) file into an
/// encoded-sRGB buffer with channels normalized to `[0, 1]`.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let mut bytes = Vec::new();
    File::open(path.as_ref())?.read_to_end(&mut bytes)?;
    if bytes.starts_with(&PNG_MAGIC) {
        load_png(&bytes)
    } else if bytes.starts_with(b"P6") {
        load_ppm(&bytes)
    } else {
        Err(Error::UnsupportedImage(format!(
            "{}: neither PNG nor binary PPM",
            path.as_ref().display()
        )))
    }
}

fn load_png(bytes: &[u8]) -> Result<ImageBuffer> {
    let decoder = png::Decoder::new(bytes);
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf)?;
    if info.color_type != png::ColorType::Rgb {
        return Err(Error::UnsupportedImage(format!(
            "PNG color type {:?} (only RGB is supported)",
            info.color_type
        )));
    }
    let (width, height) = (info.width, info.height);
    let n = width as usize * height as usize;
    let data = match info.bit_depth {
        png::BitDepth::Eight => {
            let raw = &buf[..n * 3];
            raw.chunks_exact(3)
                .map(|c| {
                    [
                        c[0] as f64 / 255.0,
                        c[1] as f64 / 255.0,
                        c[2] as f64 / 255.0,
                    ]
                })
                .collect()
        }
        png::BitDepth::Sixteen => {
            let raw = &buf[..n * 6];
            raw.chunks_exact(6)
                .map(|c| {
                    let r = u16::from_be_bytes([c[0], c[1]]) as f64;
                    let g = u16::from_be_bytes([c[2], c[3]]) as f64;
                    let b = u16::from_be_bytes([c[4], c[5]]) as f64;
                    [r / 65535.0, g / 65535.0, b / 65535.0]
                })
                .collect()
        }
        other => {
            return Err(Error::UnsupportedImage(format!(
                "PNG bit depth {other:?} (only 8 and 16 are supported)"
            )))
        }
    };
    Ok(ImageBuffer {
        width,
        height,
        space: ColorSpace::EncodedSrgb,
        data,
    })
}

fn load_ppm(bytes: &[u8]) -> Result<ImageBuffer> {
    let mut pos = 2; // past "P6"
    let mut fields = [0u64; 3];
    for field in &mut fields {
        *field = ppm_read_number(bytes, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::CorruptImage("PPM with zero dimension".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::CorruptImage(format!("PPM maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the payload.
    pos += 1;
    let (width, height) = (width as u32, height as u32);
    let n = width as usize * height as usize;
    let bytes_per_channel = if maxval < 256 { 1 } else { 2 };
    let payload = bytes
        .get(pos..pos + n * 3 * bytes_per_channel)
        .ok_or_else(|| Error::CorruptImage("PPM pixel data truncated".into()))?;
    let scale = maxval as f64;
    let data = if bytes_per_channel == 1 {
        payload
            .chunks_exact(3)
            .map(|c| [c[0] as f64 / scale, c[1] as f64 / scale, c[2] as f64 / scale])
            .collect()
    } else {
        payload
            .chunks_exact(6)
            .map(|c| {
                [
                    u16::from_be_bytes([c[0], c[1]]) as f64 / scale,
                    u16::from_be_bytes([c[2], c[3]]) as f64 / scale,
                    u16::from_be_bytes([c[4], c[5]]) as f64 / scale,
                ]
            })
            .collect()
    };
    Ok(ImageBuffer {
        width,
        height,
        space: ColorSpace::EncodedSrgb,
        data,
    })
}

fn ppm_read_number(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    // Skip whitespace and '#' comment lines.
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(Error::CorruptImage("PPM header truncated".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| b.is_ascii_digit()) {
        *pos += 1;
    }
    if *pos == start {
        return Err(Error::CorruptImage("PPM header: expected a number".into()));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::CorruptImage("PPM header: bad number".into()))
}

/// Saves an encoded-sRGB buffer as PNG or binary PPM (chosen by file
/// extension) at the requested bit depth.
pub fn save_image(buffer: &ImageBuffer, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    buffer.expect_space(ColorSpace::EncodedSrgb)?;
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("png") => save_png(buffer, path, depth),
        Some(ext) if ext.eq_ignore_ascii_case("ppm") => save_ppm(buffer, path, depth),
        _ => Err(Error::UnsupportedImage(format!(
            "{}: output must end in .png or .ppm",
            path.display()
        ))),
    }
}

fn quantize(v: f64, max: f64) -> u16 {
    (v.clamp(0.0, 1.0) * max).round() as u16
}

fn encode_payload(buffer: &ImageBuffer, depth: BitDepth) -> Vec<u8> {
    match depth {
        BitDepth::Eight => buffer
            .data
            .iter()
            .flat_map(|p| p.map(|v| quantize(v, 255.0) as u8))
            .collect(),
        BitDepth::Sixteen => {
            let mut out = Vec::with_capacity(buffer.data.len() * 6);
            for p in &buffer.data {
                for v in p {
                    out.extend_from_slice(&quantize(*v, 65535.0).to_be_bytes());
                }
            }
            out
        }
    }
}

fn save_png(buffer: &ImageBuffer, path: &Path, depth: BitDepth) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let mut encoder = png::Encoder::new(file, buffer.width, buffer.height);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(match depth {
        BitDepth::Eight => png::BitDepth::Eight,
        BitDepth::Sixteen => png::BitDepth::Sixteen,
    });
    let mut writer = encoder.write_header()?;
    writer.write_image_data(&encode_payload(buffer, depth))?;
    Ok(())
}

fn save_ppm(buffer: &ImageBuffer, path: &Path, depth: BitDepth) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    let maxval = match depth {
        BitDepth::Eight => 255,
        BitDepth::Sixteen => 65535,
    };
    write!(file, "P6\n{} {}\n{}\n", buffer.width, buffer.height, maxval)?;
    file.write_all(&encode_payload(buffer, depth))?;
    Ok(())
}

/// Loads from an in-memory byte slice; used by tests for corrupt-input
/// cases without touching the filesystem.
#[doc(hidden)]
pub fn load_image_bytes(bytes: &[u8]) -> Result<ImageBuffer> {
    if bytes.starts_with(&PNG_MAGIC) {
        load_png(bytes)
    } else if bytes.starts_with(b"P6") {
        load_ppm(bytes)
    } else {
        Err(Error::UnsupportedImage("neither PNG nor binary PPM".into()))
    }
}
