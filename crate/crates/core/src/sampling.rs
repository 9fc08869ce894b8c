//! Reproducible scalar sample streams and multivariate-normal point sets.
//!
//! Every stream is identified by `(seed, stream_index)`. The pair is hashed
//! into one 64-bit value with splitmix64,
//!
//! ```text
//! key = splitmix64( splitmix64(seed) ^ splitmix64(stream_index ^ STREAM_SALT) )
//! ```
//!
//! and `key` seeds a xoshiro256** generator (whose own `seed_from_u64` fills
//! the 256-bit state with splitmix64 outputs). A 64-bit output `w` becomes the
//! open-interval uniform `((w >> 11) + 0.5) · 2⁻⁵³`; normals are obtained by
//! pushing that uniform through [`normal_inverse_cdf`], so every law consumes
//! exactly one generator output per draw.

use ndarray::{Array2, ArrayView1};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::dense::vecmat_into;
use crate::error::{Result, TmcError};
use crate::toeplitz::build_operator;

const STREAM_SALT: u64 = 0xD1B5_4A32_D192_ED03;
const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Stream index reserved for drawing the random triangular factor.
pub const FACTOR_STREAM: u64 = u64::MAX;

#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream_key(seed: u64, stream_index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(stream_index ^ STREAM_SALT))
}

/// Univariate sampling law of the scalar stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Law {
    /// Uniform on (−1/2, 1/2).
    UniformCentered,
    /// Uniform on (0, 1).
    UniformUnit,
    /// Standard normal via the inverse CDF.
    StdNormal,
}

impl Law {
    pub fn mean(self) -> f64 {
        match self {
            Law::UniformCentered | Law::StdNormal => 0.0,
            Law::UniformUnit => 0.5,
        }
    }

    pub fn variance(self) -> f64 {
        match self {
            Law::UniformCentered | Law::UniformUnit => 1.0 / 12.0,
            Law::StdNormal => 1.0,
        }
    }
}

/// Incremental generator behind [`SampleStream`].
#[derive(Debug, Clone)]
pub struct StreamRng {
    rng: Xoshiro256StarStar,
    law: Law,
}

impl StreamRng {
    pub fn new(seed: u64, stream_index: u64, law: Law) -> Self {
        Self {
            rng: Xoshiro256StarStar::seed_from_u64(stream_key(seed, stream_index)),
            law,
        }
    }

    #[inline]
    fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }

    #[inline]
    pub fn draw(&mut self) -> f64 {
        let u = self.open_unit();
        match self.law {
            Law::UniformUnit => u,
            Law::UniformCentered => u - 0.5,
            Law::StdNormal => inverse_cdf_unchecked(u),
        }
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.draw();
        }
    }
}

/// A seeded sequence of i.i.d. scalar draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    seed: u64,
    stream_index: u64,
    law: Law,
    values: Vec<f64>,
}

impl SampleStream {
    /// Wraps explicit values; used for hand-built test streams.
    pub fn from_values(law: Law, values: Vec<f64>) -> Self {
        Self {
            seed: 0,
            stream_index: 0,
            law,
            values,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn law(&self) -> Law {
        self.law
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl AsRef<[f64]> for SampleStream {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Draws `count` values; `(seed, stream_index, law, count)` fixes them bit-exactly.
pub fn make_stream(seed: u64, stream_index: u64, law: Law, count: usize) -> SampleStream {
    let mut rng = StreamRng::new(seed, stream_index, law);
    let mut values = vec![0.0; count];
    rng.fill(&mut values);
    SampleStream {
        seed,
        stream_index,
        law,
        values,
    }
}

// Wichura's AS241 (PPND16), good to about 1e-16 relative. Coefficients keep
// their published digits.
#[allow(clippy::excessive_precision)]
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
#[allow(clippy::excessive_precision)]
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
#[allow(clippy::excessive_precision)]
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
#[allow(clippy::excessive_precision)]
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
#[allow(clippy::excessive_precision)]
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
#[allow(clippy::excessive_precision)]
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

#[inline]
fn horner(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[inline]
fn inverse_cdf_unchecked(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        horner(&C, r) / horner(&D, r)
    } else {
        r -= 5.0;
        horner(&E, r) / horner(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Standard normal quantile Φ⁻¹(u) for `u ∈ (0, 1)`.
pub fn normal_inverse_cdf(u: f64) -> Result<f64> {
    if u > 0.0 && u < 1.0 {
        Ok(inverse_cdf_unchecked(u))
    } else {
        Err(TmcError::Domain { value: u })
    }
}

/// Upper-triangular `A` with positive diagonal, so `Σ = AᵀA` is SPD.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularFactor {
    entries: Array2<f64>,
}

impl TriangularFactor {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let s = entries.nrows();
        if entries.ncols() != s || s == 0 {
            return Err(TmcError::InvalidArgument(
                "triangular factor must be square and non-empty".into(),
            ));
        }
        for i in 0..s {
            if entries[[i, i]] <= 0.0 {
                return Err(TmcError::InvalidArgument(format!("diagonal entry {i} is not positive")));
            }
            for j in 0..i {
                if entries[[i, j]] != 0.0 {
                    return Err(TmcError::InvalidArgument(format!(
                        "entry ({i}, {j}) below the diagonal is non-zero"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn identity(s: usize) -> Self {
        Self {
            entries: Array2::eye(s),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn covariance(&self) -> Array2<f64> {
        self.entries.t().dot(&self.entries)
    }
}

/// Random factor: strictly upper entries ~ N(0,1), diagonal ~ |N(0,1)| + 0.1.
///
/// Entries are filled row by row from the stream `(seed, FACTOR_STREAM)`.
pub fn random_upper_factor(s: usize, seed: u64) -> Result<TriangularFactor> {
    if s == 0 {
        return Err(TmcError::InvalidArgument("factor dimension must be >= 1".into()));
    }
    let mut rng = StreamRng::new(seed, FACTOR_STREAM, Law::StdNormal);
    let mut entries = Array2::zeros((s, s));
    for i in 0..s {
        entries[[i, i]] = rng.draw().abs() + 0.1;
        for j in i + 1..s {
            entries[[i, j]] = rng.draw();
        }
    }
    Ok(TriangularFactor { entries })
}

/// How a point set is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Standard Monte Carlo: a fresh length-`s` vector per point.
    Mc,
    /// Toeplitz Monte Carlo: sliding windows of one scalar stream.
    Tmc,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Mc => "MC",
            Method::Tmc => "TMC",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// `N` points from `N(μ, AᵀA)`, one per row: `y = μ + x A`.
///
/// MC draws `N·s` normals and multiplies each vector densely; TMC draws
/// `N + s − 1` normals and multiplies the whole Toeplitz matrix by `A` with
/// FFTs.
pub fn generate_mvn(
    method: Method,
    mu: ArrayView1<'_, f64>,
    factor: &TriangularFactor,
    n: usize,
    seed: u64,
    stream_index: u64,
) -> Result<Array2<f64>> {
    let s = factor.dim();
    if mu.len() != s {
        return Err(TmcError::DimensionMismatch {
            expected: s,
            got: mu.len(),
        });
    }
    if n == 0 {
        return Err(TmcError::InvalidArgument("N must be >= 1".into()));
    }
    let a = factor.matrix().view();
    let mut out = match method {
        Method::Mc => {
            let mut rng = StreamRng::new(seed, stream_index, Law::StdNormal);
            let mut out = Array2::zeros((n, s));
            let mut x = vec![0.0; s];
            for mut row in out.rows_mut() {
                rng.fill(&mut x);
                vecmat_into(&x, a, row.as_slice_mut().expect("fresh array is contiguous"));
            }
            out
        }
        Method::Tmc => {
            let stream = make_stream(seed, stream_index, Law::StdNormal, n + s - 1);
            build_operator(&stream, n, s)?.fast_matmat(a)?
        }
    };
    out += &mu;
    Ok(out)
}
