//! PGM ingestion and the binarize → crop → resize preprocessing chain.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::Dataset;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Range(format!("image size {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::shape(width * height, pixels.len()));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &p in &self.pixels {
            hist[p as usize] += 1;
        }
        hist
    }
}

/// Two-level image; 1 is ink, 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Range(format!("image size {width}x{height}")));
        }
        if bits.len() != width * height {
            return Err(Error::shape(width * height, bits.len()));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Range("binary image bits must be 0 or 1".into()));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.bits[y * self.width + x]
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

/// Otsu threshold over the 256-bin histogram: the smallest `t` maximizing
/// the between-class variance of `{< t}` versus `{>= t}`.
pub fn otsu_threshold(img: &GrayImage) -> Result<u8> {
    let hist = img.histogram();
    let levels: Vec<usize> = (0..256).filter(|&i| hist[i] > 0).collect();
    if levels.len() < 2 {
        return Err(Error::DegenerateHistogram(levels[0] as u8));
    }
    let total = img.pixels.len() as f64;
    let sum_all: f64 = (0..256).map(|i| i as f64 * hist[i] as f64).sum();

    let mut best_t = 0usize;
    let mut best_var = -1.0f64;
    let mut weight_lo = 0.0f64;
    let mut sum_lo = 0.0f64;
    for t in 1..256 {
        weight_lo += hist[t - 1] as f64;
        sum_lo += (t - 1) as f64 * hist[t - 1] as f64;
        let weight_hi = total - weight_lo;
        if weight_lo == 0.0 || weight_hi == 0.0 {
            continue;
        }
        let mean_lo = sum_lo / weight_lo;
        let mean_hi = (sum_all - sum_lo) / weight_hi;
        let between = weight_lo * weight_hi * (mean_lo - mean_hi).powi(2);
        if between > best_var {
            best_var = between;
            best_t = t;
        }
    }
    Ok(best_t as u8)
}

/// Dark ink on a light background: pixels below the Otsu threshold become ink.
pub fn binarize(img: &GrayImage) -> Result<BinaryImage> {
    let t = otsu_threshold(img)?;
    let bits = img.pixels.iter().map(|&p| u8::from(p < t)).collect();
    BinaryImage::new(img.width, img.height, bits)
}

/// Minimal bounding box containing every ink pixel.
pub fn crop_to_content(img: &BinaryImage) -> Result<BinaryImage> {
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in 0..img.height {
        for x in 0..img.width {
            if img.get(x, y) == 1 {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    if x0 == usize::MAX {
        return Err(Error::EmptyContent);
    }
    let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
    let mut bits = Vec::with_capacity(w * h);
    for y in y0..=y1 {
        bits.extend_from_slice(&img.bits[y * img.width + x0..y * img.width + x1 + 1]);
    }
    BinaryImage::new(w, h, bits)
}

/// Nearest-neighbor resampling to `side × side`; source index is
/// `floor(dest * src_extent / side)` on each axis.
pub fn resize_nearest(img: &BinaryImage, side: usize) -> Result<BinaryImage> {
    if side == 0 {
        return Err(Error::Range("resize side must be >= 1".into()));
    }
    let mut bits = Vec::with_capacity(side * side);
    for dy in 0..side {
        let sy = dy * img.height / side;
        for dx in 0..side {
            let sx = dx * img.width / side;
            bits.push(img.get(sx, sy));
        }
    }
    BinaryImage::new(side, side, bits)
}

/// The full chain applied to every corpus image.
pub fn preprocess(img: &GrayImage, side: usize) -> Result<BinaryImage> {
    resize_nearest(&crop_to_content(&binarize(img)?)?, side)
}

/// Parses a P2 (ASCII) or P5 (binary) PGM with maxval ≤ 255.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos).ok_or_else(|| Error::Pgm("missing magic".into()))?;
    let binary = match magic.as_slice() {
        b"P2" => false,
        b"P5" => true,
        other => {
            return Err(Error::Pgm(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
        let tok =
            next_token(bytes, &mut pos).ok_or_else(|| Error::Pgm(format!("missing {name}")))?;
        *slot = std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm(format!("bad {name}")))?;
    }
    let [width, height, maxval] = header;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("maxval {maxval} not in 1..=255")));
    }
    if width == 0 || height == 0 {
        return Err(Error::Pgm(format!("image size {width}x{height}")));
    }
    let count = width * height;
    let raw: Vec<usize> = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let data = bytes
            .get(pos..pos + count)
            .ok_or_else(|| Error::Pgm(format!("raster truncated, expected {count} bytes")))?;
        data.iter().map(|&b| b as usize).collect()
    } else {
        let mut vals = Vec::with_capacity(count);
        for _ in 0..count {
            let tok = next_token(bytes, &mut pos)
                .ok_or_else(|| Error::Pgm(format!("raster truncated, expected {count} values")))?;
            let v: usize = std::str::from_utf8(&tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Pgm("bad pixel value".into()))?;
            vals.push(v);
        }
        vals
    };
    let mut pixels = Vec::with_capacity(count);
    for v in raw {
        if v > maxval {
            return Err(Error::Pgm(format!("pixel {v} exceeds maxval {maxval}")));
        }
        // Rescale to the full 0..=255 range.
        pixels.push(((v * 255 + maxval / 2) / maxval) as u8);
    }
    GrayImage::new(width, height, pixels)
}

/// Header token; `#` comments run to end of line.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<Vec<u8>> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    (start < *pos).then(|| bytes[start..*pos].to_vec())
}

/// Writes a binary (P5) PGM.
pub fn write_pgm(img: &GrayImage, mut out: impl Write) -> std::io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", img.width, img.height)?;
    out.write_all(&img.pixels)
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn is_pgm(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// Loads `<root>/<class>/<image>.pgm`; classes are indexed in lexicographic
/// directory order and every image is flattened after [`preprocess`].
pub fn load_image_dir(root: impl AsRef<Path>, side: usize) -> Result<Dataset> {
    let root = root.as_ref();
    let class_dirs: Vec<PathBuf> = read_dir_sorted(root)?
        .into_iter()
        .filter(|p| p.is_dir())
        .collect();
    if class_dirs.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{}: no class subdirectories",
            root.display()
        )));
    }

    let mut files = Vec::new();
    let mut names = Vec::with_capacity(class_dirs.len());
    for (class, dir) in class_dirs.iter().enumerate() {
        let images: Vec<PathBuf> = read_dir_sorted(dir)?
            .into_iter()
            .filter(|p| is_pgm(p))
            .collect();
        if images.is_empty() {
            return Err(Error::EmptyInput(format!(
                "{}: class directory has no .pgm images",
                dir.display()
            )));
        }
        names.push(dir.file_name().unwrap().to_string_lossy().into_owned());
        files.extend(images.into_iter().map(|p| (p, class)));
    }

    // Parallel decode; `collect` keeps directory-listing order.
    let decoded: Vec<Result<BinaryImage>> = files
        .par_iter()
        .map(|(path, _)| {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            read_pgm(&bytes)
                .and_then(|g| preprocess(&g, side))
                .map_err(|e| Error::File {
                    path: path.clone(),
                    source: Box::new(e),
                })
        })
        .collect();

    let mut features = Vec::with_capacity(files.len() * side * side);
    let mut labels = Vec::with_capacity(files.len());
    for (img, (_, class)) in decoded.into_iter().zip(&files) {
        features.extend(img?.bits.iter().map(|&b| f64::from(b)));
        labels.push(*class);
    }
    Dataset::from_flat(features, side * side, labels, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: usize, h: usize, px: &[u8]) -> GrayImage {
        GrayImage::new(w, h, px.to_vec()).unwrap()
    }

    fn bin(w: usize, h: usize, bits: &[u8]) -> BinaryImage {
        BinaryImage::new(w, h, bits.to_vec()).unwrap()
    }

    #[test]
    fn binarize_two_levels() {
        assert_eq!(binarize(&gray(2, 1, &[0, 255])).unwrap().bits(), &[1, 0]);
        assert_eq!(
            binarize(&gray(2, 2, &[10, 10, 200, 200])).unwrap().bits(),
            &[1, 1, 0, 0]
        );
    }

    #[test]
    fn binarize_single_level_is_degenerate() {
        assert!(matches!(
            binarize(&gray(1, 1, &[128])),
            Err(Error::DegenerateHistogram(128))
        ));
    }

    #[test]
    fn crop_examples() {
        let mut bits = vec![0; 16];
        bits[4 + 1] = 1;
        bits[2 * 4 + 2] = 1;
        let c = crop_to_content(&bin(4, 4, &bits)).unwrap();
        assert_eq!((c.width(), c.height()), (2, 2));
        assert_eq!(c.bits(), &[1, 0, 0, 1]);

        let full = bin(3, 2, &[1; 6]);
        assert_eq!(crop_to_content(&full).unwrap(), full);

        assert!(matches!(
            crop_to_content(&bin(2, 2, &[0; 4])),
            Err(Error::EmptyContent)
        ));
    }

    #[test]
    fn resize_examples() {
        let img = bin(2, 2, &[1, 0, 0, 1]);
        assert_eq!(resize_nearest(&img, 2).unwrap(), img);
        let up = resize_nearest(&img, 4).unwrap();
        assert_eq!(up.bits(), &[1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1]);
        assert_eq!(resize_nearest(&bin(1, 1, &[1]), 3).unwrap().bits(), &[1; 9]);
    }

    #[test]
    fn pgm_ascii_with_comments() {
        let src = b"P2\n# a comment\n3 2 # trailing\n15\n0 15 7\n15 0 15\n";
        let img = read_pgm(src).unwrap();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(img.pixels(), &[0, 255, 119, 255, 0, 255]);
    }

    #[test]
    fn pgm_binary_round_trip() {
        let img = gray(3, 2, &[0, 9, 200, 255, 1, 2]);
        let mut buf = Vec::new();
        write_pgm(&img, &mut buf).unwrap();
        assert_eq!(read_pgm(&buf).unwrap(), img);
    }

    #[test]
    fn pgm_rejects_bad_input() {
        assert!(read_pgm(b"P6\n1 1\n255\n\0").is_err());
        assert!(read_pgm(b"P5\n2 2\n255\n\0\0").is_err());
        assert!(read_pgm(b"P2\n1 1\n300\n0").is_err());
        assert!(read_pgm(b"P2\n1 1\n10\n11").is_err());
    }

    proptest! {
        #[test]
        fn crop_is_idempotent(w in 1usize..8, h in 1usize..8, seed in any::<u64>()) {
            let bits: Vec<u8> = (0..w * h)
                .map(|i| u8::from((seed >> (i % 64)) & 1 == 1))
                .collect();
            prop_assume!(bits.contains(&1));
            let img = bin(w, h, &bits);
            let once = crop_to_content(&img).unwrap();
            prop_assert_eq!(crop_to_content(&once).unwrap(), once);
        }

        #[test]
        fn two_level_binarization_ignores_monotone_remap(
            lo in 0u8..128, gap in 1u8..128, pattern in any::<u16>(),
            lo2 in 0u8..100, gap2 in 1u8..150,
        ) {
            let hi = lo.saturating_add(gap);
            let hi2 = lo2.saturating_add(gap2);
            prop_assume!(hi > lo && hi2 > lo2);
            let mut mask: Vec<bool> = (0..16).map(|i| (pattern >> i) & 1 == 1).collect();
            mask[0] = true;
            mask[1] = false;
            let a: Vec<u8> = mask.iter().map(|&m| if m { lo } else { hi }).collect();
            let b: Vec<u8> = mask.iter().map(|&m| if m { lo2 } else { hi2 }).collect();
            prop_assert_eq!(
                binarize(&gray(4, 4, &a)).unwrap(),
                binarize(&gray(4, 4, &b)).unwrap()
            );
        }

        #[test]
        fn upscaled_single_ink_pixel_survives(w in 1usize..9, h in 1usize..9, px in 0usize..81) {
            let mut bits = vec![0u8; w * h];
            bits[px % (w * h)] = 1;
            let img = bin(w, h, &bits);
            let up = resize_nearest(&img, w.max(h)).unwrap();
            let cropped = crop_to_content(&up).unwrap();
            prop_assert!(cropped.ink_count() >= 1);
        }
    }
}
