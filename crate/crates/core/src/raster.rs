//! Frame and segmentation rasters.

use std::path::Path;

use crate::error::{Error, Result};

/// 8-bit single-channel frame, row-major digital counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParam(format!("image dims {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidParam(format!(
                "image data length {} != {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dims must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dims must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Bilinear sample with pixel centers on integer coordinates. `None`
    /// outside `[0, w-1] x [0, h-1]`.
    pub fn bilinear(&self, x: f64, y: f64) -> Option<f64> {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        if !(0.0..=max_x).contains(&x) || !(0.0..=max_y).contains(&y) {
            return None;
        }
        let x0 = (x.floor() as usize).min(self.width - 1);
        let y0 = (y.floor() as usize).min(self.height - 1);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let p00 = self.get(x0, y0) as f64;
        let p10 = self.get(x1, y0) as f64;
        let p01 = self.get(x0, y1) as f64;
        let p11 = self.get(x1, y1) as f64;
        let top = p00 + (p10 - p00) * fx;
        let bottom = p01 + (p11 - p01) * fx;
        Some(top + (bottom - top) * fy)
    }

    pub fn same_dims<T: Dims>(&self, other: &T) -> Result<()> {
        check_dims(self, other)
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.display().to_string(),
            source,
        })?;
        let luma = img.into_luma8();
        let (w, h) = luma.dimensions();
        Self::new(w as usize, h as usize, luma.into_raw())
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        save_gray(path, self.width, self.height, &self.data)
    }
}

/// Segmentation classes with their mask pixel values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Label {
    Background = 0,
    Sclera = 1,
    Iris = 2,
    Pupil = 3,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Background, Label::Sclera, Label::Iris, Label::Pupil];

    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::Background),
            1 => Some(Label::Sclera),
            2 => Some(Label::Iris),
            3 => Some(Label::Pupil),
            _ => None,
        }
    }

    /// Iris or pupil, i.e. inside the limbus.
    #[inline]
    pub fn is_eye_disk(self) -> bool {
        matches!(self, Label::Iris | Label::Pupil)
    }
}

/// Per-pixel class raster paired with a frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegMask {
    width: usize,
    height: usize,
    labels: Vec<Label>,
}

impl SegMask {
    pub fn new(width: usize, height: usize, labels: Vec<Label>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParam(format!("mask dims {width}x{height}")));
        }
        if labels.len() != width * height {
            return Err(Error::InvalidParam(format!(
                "mask length {} != {width}x{height}",
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// Build from raw class ids; any id outside 0..=3 is rejected.
    pub fn from_raw(width: usize, height: usize, raw: &[u8]) -> Result<Self> {
        let labels = raw
            .iter()
            .map(|&v| {
                Label::from_u8(v).ok_or_else(|| Error::InvalidParam(format!("mask label {v}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(width, height, labels)
    }

    pub fn filled(width: usize, height: usize, label: Label) -> Self {
        assert!(width > 0 && height > 0, "mask dims must be positive");
        Self {
            width,
            height,
            labels: vec![label; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Label) -> Self {
        assert!(width > 0 && height > 0, "mask dims must be positive");
        let mut labels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            labels,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Label {
        self.labels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, label: Label) {
        self.labels[y * self.width + x] = label;
    }

    /// Label of the nearest pixel, `None` outside the raster.
    pub fn nearest(&self, x: f64, y: f64) -> Option<Label> {
        let xr = x.round();
        let yr = y.round();
        if xr < 0.0 || yr < 0.0 || xr >= self.width as f64 || yr >= self.height as f64 {
            return None;
        }
        Some(self.get(xr as usize, yr as usize))
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn to_raw(&self) -> Vec<u8> {
        self.labels.iter().map(|&l| l as u8).collect()
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = GrayImage::load_png(path)?;
        Self::from_raw(img.width, img.height, &img.data)
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        save_gray(path, self.width, self.height, &self.to_raw())
    }
}

/// Anything with raster dimensions.
pub trait Dims {
    fn dims(&self) -> (usize, usize);
}

impl Dims for GrayImage {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

impl Dims for SegMask {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

pub(crate) fn check_dims(a: &impl Dims, b: &impl Dims) -> Result<()> {
    let (aw, ah) = a.dims();
    let (bw, bh) = b.dims();
    if aw != bw || ah != bh {
        return Err(Error::DimensionMismatch(aw, ah, bw, bh));
    }
    Ok(())
}

fn save_gray(path: &Path, width: usize, height: usize, data: &[u8]) -> Result<()> {
    image::save_buffer_with_format(
        path,
        data,
        width as u32,
        height as u32,
        image::ExtendedColorType::L8,
        image::ImageFormat::Png,
    )
    .map_err(|source| Error::Image {
        path: path.display().to_string(),
        source,
    })
}
