//! Ten-variant image augmentation: the original, a horizontal flip and the
//! eight one-pixel shifts.
//!
//! Augmentation happens on raw images, before feature extraction. The
//! extractors at the bottom of this module stand in for a pretrained
//! network when no real feature pipeline is available.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::feature::FeatureVector;

/// Row-major, channel-interleaved 8-bit image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageTensor {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<u8>,
}

impl ImageTensor {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidImage(format!("empty image {height}x{width}")));
        }
        if !(1..=4).contains(&channels) {
            return Err(Error::InvalidImage(format!(
                "{channels} channels, expected 1..=4"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::InvalidImage(format!(
                "{} samples for a {height}x{width}x{channels} image",
                data.len()
            )));
        }
        Ok(ImageTensor {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::new(height, width, channels, vec![0; height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> &[u8] {
        let i = (row * self.width + col) * self.channels;
        &self.data[i..i + self.channels]
    }

    fn same_shape_zeros(&self) -> Self {
        ImageTensor {
            data: vec![0; self.data.len()],
            ..*self
        }
    }
}

/// Mirrors the image left to right.
pub fn hflip(img: &ImageTensor) -> ImageTensor {
    let mut out = img.same_shape_zeros();
    let ch = img.channels;
    let row_len = img.width * ch;
    for (src, dst) in img
        .data
        .chunks_exact(row_len)
        .zip(out.data.chunks_exact_mut(row_len))
    {
        for (j, px) in src.chunks_exact(ch).enumerate() {
            let k = (img.width - 1 - j) * ch;
            dst[k..k + ch].copy_from_slice(px);
        }
    }
    out
}

/// Moves every pixel by `(dx, dy)` columns/rows, zero-filling vacated
/// positions. Output pixel `(x, y)` is input pixel `(x - dx, y - dy)`.
///
/// Panics if `dx` or `dy` is outside `-1..=1`.
pub fn shift(img: &ImageTensor, dx: i8, dy: i8) -> ImageTensor {
    assert!(
        (-1..=1).contains(&dx) && (-1..=1).contains(&dy),
        "shift offsets must be in -1..=1, got ({dx}, {dy})"
    );
    if dx == 0 && dy == 0 {
        return img.clone();
    }
    let mut out = img.same_shape_zeros();
    let (h, w, ch) = (img.height as isize, img.width as isize, img.channels);
    for y in 0..h {
        let sy = y - dy as isize;
        if !(0..h).contains(&sy) {
            continue;
        }
        for x in 0..w {
            let sx = x - dx as isize;
            if !(0..w).contains(&sx) {
                continue;
            }
            let d = ((y * w + x) as usize) * ch;
            let s = ((sy * w + sx) as usize) * ch;
            out.data[d..d + ch].copy_from_slice(&img.data[s..s + ch]);
        }
    }
    out
}

/// Shift offsets `(dx, dy)` in the order they appear after the original and
/// the flip: left, right, up, down, then the four diagonals.
pub const SHIFT_ORDER: [(i8, i8); 8] = [
    (-1, 0),
    (1, 0),
    (0, -1),
    (0, 1),
    (-1, -1),
    (1, -1),
    (-1, 1),
    (1, 1),
];

pub const NUM_VARIANTS: usize = 2 + SHIFT_ORDER.len();

/// `[original, hflip, shifts in SHIFT_ORDER]`.
pub fn generate_variants(img: &ImageTensor) -> Vec<ImageTensor> {
    let mut out = Vec::with_capacity(NUM_VARIANTS);
    out.push(img.clone());
    out.push(hflip(img));
    out.extend(SHIFT_ORDER.iter().map(|&(dx, dy)| shift(img, dx, dy)));
    out
}

/// Turns an image into a feature vector.
pub trait FeatureExtractor: Send + Sync {
    fn dim(&self) -> usize;
    fn extract(&self, img: &ImageTensor) -> Result<FeatureVector>;
}

/// Flattens samples to `[0, 1]` reals in storage order.
#[derive(Clone, Debug)]
pub struct FlattenExtractor {
    height: usize,
    width: usize,
    channels: usize,
}

impl FlattenExtractor {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        FlattenExtractor {
            height,
            width,
            channels,
        }
    }

    fn check(&self, img: &ImageTensor) -> Result<()> {
        if (img.height, img.width, img.channels) != (self.height, self.width, self.channels) {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: img.data.len(),
            });
        }
        Ok(())
    }
}

impl FeatureExtractor for FlattenExtractor {
    fn dim(&self) -> usize {
        self.height * self.width * self.channels
    }

    fn extract(&self, img: &ImageTensor) -> Result<FeatureVector> {
        self.check(img)?;
        Ok(img
            .data
            .iter()
            .map(|&v| v as f32 / 255.0)
            .collect::<Vec<_>>()
            .into())
    }
}

/// Flatten followed by a fixed Gaussian random projection, regenerated from
/// its seed.
#[derive(Clone, Debug)]
pub struct RandomProjection {
    flatten: FlattenExtractor,
    out_dim: usize,
    seed: u64,
    // [out_dim][in_dim]
    matrix: Vec<f32>,
}

impl RandomProjection {
    pub fn new(flatten: FlattenExtractor, out_dim: usize, seed: u64) -> Self {
        let in_dim = flatten.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (out_dim as f64).sqrt();
        let matrix = (0..out_dim * in_dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (z * scale) as f32
            })
            .collect();
        RandomProjection {
            flatten,
            out_dim,
            seed,
            matrix,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl FeatureExtractor for RandomProjection {
    fn dim(&self) -> usize {
        self.out_dim
    }

    fn extract(&self, img: &ImageTensor) -> Result<FeatureVector> {
        let flat = self.flatten.extract(img)?;
        let x = flat.as_slice();
        let out = self
            .matrix
            .chunks_exact(x.len())
            .map(|row| {
                row.iter()
                    .zip(x)
                    .map(|(&a, &b)| a as f64 * b as f64)
                    .sum::<f64>() as f32
            })
            .collect::<Vec<_>>();
        Ok(out.into())
    }
}

/// Extracts features for all ten variants of `img`.
pub fn extract_variants(
    extractor: &dyn FeatureExtractor,
    img: &ImageTensor,
) -> Result<Vec<FeatureVector>> {
    generate_variants(img)
        .iter()
        .map(|v| extractor.extract(v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(h: usize, w: usize, data: &[u8]) -> ImageTensor {
        ImageTensor::new(h, w, 1, data.to_vec()).unwrap()
    }

    /// Brute-force index mapping, independent of the row/chunk loops.
    fn brute_shift(img: &ImageTensor, dx: i8, dy: i8) -> Vec<u8> {
        let mut out = Vec::new();
        for y in 0..img.height() as isize {
            for x in 0..img.width() as isize {
                let (sx, sy) = (x - dx as isize, y - dy as isize);
                for c in 0..img.channels() {
                    let inside = sx >= 0
                        && sy >= 0
                        && sx < img.width() as isize
                        && sy < img.height() as isize;
                    out.push(if inside {
                        img.pixel(sy as usize, sx as usize)[c]
                    } else {
                        0
                    });
                }
            }
        }
        out
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ImageTensor::new(2, 2, 1, vec![0; 3]).is_err());
        assert!(ImageTensor::new(2, 2, 5, vec![0; 20]).is_err());
        assert!(ImageTensor::new(0, 2, 1, vec![]).is_err());
    }

    #[test]
    fn hflip_examples() {
        assert_eq!(hflip(&gray(1, 2, &[7, 9])).data(), &[9, 7]);
        assert_eq!(
            hflip(&gray(2, 3, &[1, 2, 3, 4, 5, 6])).data(),
            &[3, 2, 1, 6, 5, 4]
        );
        // channels move together
        let rgb = ImageTensor::new(1, 2, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(hflip(&rgb).data(), &[4, 5, 6, 1, 2, 3]);
    }

    #[test]
    fn shift_examples() {
        let img = gray(1, 3, &[5, 6, 7]);
        assert_eq!(shift(&img, 0, 0), img);
        assert_eq!(shift(&img, 1, 0).data(), &[0, 5, 6]);
        let sq = gray(2, 2, &[1, 2, 3, 4]);
        assert_eq!(shift(&sq, -1, -1).data(), &[4, 0, 0, 0]);
        assert_eq!(
            shift(&sq, -1, -1).data(),
            brute_shift(&sq, -1, -1).as_slice()
        );
    }

    #[test]
    #[should_panic]
    fn shift_rejects_two_pixel_offsets() {
        shift(&gray(2, 2, &[0; 4]), 2, 0);
    }

    #[test]
    fn variants_of_zero_image_are_identical() {
        let z = ImageTensor::zeros(3, 3, 2).unwrap();
        let vs = generate_variants(&z);
        assert_eq!(vs.len(), 10);
        assert!(vs.iter().all(|v| *v == z));
    }

    #[test]
    fn ramp_variants_are_distinct() {
        let data: Vec<u8> = (0..16).map(|i| 10 + i as u8 * 7).collect();
        let ramp = gray(4, 4, &data);
        let vs = generate_variants(&ramp);
        assert_eq!(vs[0], ramp);
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                assert_ne!(vs[i], vs[j], "variants {i} and {j} coincide");
            }
        }
    }

    #[test]
    fn flatten_scales_to_unit_interval() {
        let e = FlattenExtractor::new(1, 2, 1);
        let x = e.extract(&gray(1, 2, &[0, 255])).unwrap();
        assert_eq!(x.as_slice(), &[0.0, 1.0]);
        assert!(e.extract(&gray(2, 1, &[0, 0])).is_err());
    }

    #[test]
    fn projection_is_reproducible_from_seed() {
        let a = RandomProjection::new(FlattenExtractor::new(2, 2, 1), 3, 42);
        let b = RandomProjection::new(FlattenExtractor::new(2, 2, 1), 3, 42);
        let img = gray(2, 2, &[1, 50, 100, 200]);
        assert_eq!(a.extract(&img).unwrap(), b.extract(&img).unwrap());
        assert_eq!(a.dim(), 3);
        let vs = extract_variants(&a, &img).unwrap();
        assert_eq!(vs.len(), 10);
    }

    fn arb_image() -> impl Strategy<Value = ImageTensor> {
        (1usize..6, 1usize..6, 1usize..5).prop_flat_map(|(h, w, c)| {
            proptest::collection::vec(any::<u8>(), h * w * c)
                .prop_map(move |d| ImageTensor::new(h, w, c, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn hflip_is_involution(img in arb_image()) {
            prop_assert_eq!(hflip(&hflip(&img)), img);
        }

        #[test]
        fn shift_matches_brute_force(img in arb_image(), dx in -1i8..=1, dy in -1i8..=1) {
            let got = shift(&img, dx, dy);
            let want = brute_shift(&img, dx, dy);
            prop_assert_eq!(got.data(), want.as_slice());
        }

        #[test]
        fn shift_back_restores_interior(img in arb_image(), dx in -1i8..=1, dy in -1i8..=1) {
            let back = shift(&shift(&img, dx, dy), -dx, -dy);
            let (h, w) = (img.height() as isize, img.width() as isize);
            for y in 0..h {
                for x in 0..w {
                    // pixels whose forward image stayed inside the frame
                    let (fx, fy) = (x + dx as isize, y + dy as isize);
                    if fx >= 0 && fy >= 0 && fx < w && fy < h {
                        prop_assert_eq!(back.pixel(y as usize, x as usize), img.pixel(y as usize, x as usize));
                    }
                }
            }
        }

        #[test]
        fn variants_keep_shape(img in arb_image()) {
            let vs = generate_variants(&img);
            prop_assert_eq!(vs.len(), NUM_VARIANTS);
            for v in &vs {
                prop_assert_eq!((v.height(), v.width(), v.channels()), (img.height(), img.width(), img.channels()));
            }
            prop_assert_eq!(&vs, &generate_variants(&img));
        }
    }
}
