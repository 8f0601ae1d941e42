//! 8-bit PNG frames.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};
use tempyr_core::Image;

use crate::error::{io_err, Error, Result};
use crate::fsutil::write_atomic;

/// Reads a PNG as 1 channel (grey, grey+alpha) or 3 channels (anything else).
/// Alpha is dropped.
pub fn read_png(path: &Path) -> Result<Image> {
    if !path.exists() {
        return Err(io_err(path)(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            "no such file",
        )));
    }
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.into(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = matches!(
        img,
        DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
    );
    let out = if gray {
        let buf = img.into_luma16();
        Image::from_vec(
            h,
            w,
            1,
            buf.into_raw()
                .into_iter()
                .map(|v| v as f64 / 65535.0)
                .collect(),
        )
    } else {
        let buf = img.into_rgb16();
        Image::from_vec(
            h,
            w,
            3,
            buf.into_raw()
                .into_iter()
                .map(|v| v as f64 / 65535.0)
                .collect(),
        )
    };
    Ok(out?)
}

/// Rounds `[0, 1]` to 8 bits, halves away from zero.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let (h, w, c) = img.dims();
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    let dynimg = if c == 1 {
        DynamicImage::ImageLuma8(
            GrayImage::from_raw(w as u32, h as u32, bytes).expect("sized buffer"),
        )
    } else {
        DynamicImage::ImageRgb8(
            RgbImage::from_raw(w as u32, h as u32, bytes).expect("sized buffer"),
        )
    };
    let mut out = std::io::Cursor::new(Vec::new());
    dynimg
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: "<memory>".into(),
            source,
        })?;
    Ok(out.into_inner())
}

pub fn write_png(path: &Path, img: &Image) -> Result<()> {
    let bytes = encode_png(img)?;
    write_atomic(path, |f| std::io::Write::write_all(f, &bytes))
}
