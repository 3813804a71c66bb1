//! Synthetic `AXB = C` instances: Gaussian (Type I) and controlled-spectrum
//! (Type II) coefficient matrices with planted solutions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::RandomSource;
use crate::scalar::Real;

pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Type1,
    Type2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub rank_a: usize,
    pub rank_b: usize,
    /// `σ_max/σ_min`, Type II only.
    pub cond_a: f64,
    pub cond_b: f64,
    pub family: Family,
    pub consistent: bool,
    /// Present iff the instance is inconsistent.
    pub noise_delta: Option<f64>,
    pub seed: u64,
}

impl ProblemSpec {
    /// Full-rank Type I spec.
    pub fn type1(m: usize, p: usize, q: usize, n: usize, consistent: bool, seed: u64) -> Self {
        Self {
            m,
            p,
            q,
            n,
            rank_a: m.min(p),
            rank_b: q.min(n),
            cond_a: 1.0,
            cond_b: 1.0,
            family: Family::Type1,
            consistent,
            noise_delta: (!consistent).then_some(DEFAULT_DELTA),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.m, self.p, self.q, self.n].contains(&0) {
            return Err(Error::BadSpec("dimensions must be positive".into()));
        }
        if self.rank_a == 0 || self.rank_a > self.m.min(self.p) {
            return Err(Error::BadSpec(format!(
                "rank_a {} outside 1..={}",
                self.rank_a,
                self.m.min(self.p)
            )));
        }
        if self.rank_b == 0 || self.rank_b > self.q.min(self.n) {
            return Err(Error::BadSpec(format!(
                "rank_b {} outside 1..={}",
                self.rank_b,
                self.q.min(self.n)
            )));
        }
        match (self.consistent, self.noise_delta) {
            (true, Some(_)) => {
                return Err(Error::BadSpec(
                    "consistent instances take no noise_delta".into(),
                ))
            }
            (false, None) => {
                return Err(Error::BadSpec(
                    "inconsistent instances need noise_delta".into(),
                ))
            }
            (false, Some(d)) if !(d > 0.0 && d < 1.0) => {
                return Err(Error::BadSpec(format!("noise_delta {d} outside (0, 1)")))
            }
            _ => {}
        }
        if self.family == Family::Type2 && !(self.cond_a >= 1.0 && self.cond_b >= 1.0) {
            return Err(Error::BadSpec(
                "condition numbers must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance<T> {
    pub a: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
    pub c: DenseMatrix<T>,
    pub planted_x: DenseMatrix<T>,
    pub spec: ProblemSpec,
}

/// Builds the instance from `spec.seed`.
pub fn generate<T: Real>(spec: &ProblemSpec) -> Result<ProblemInstance<T>> {
    let mut rng = RandomSource::new(spec.seed);
    match spec.family {
        Family::Type1 => gen_type1(spec, &mut rng),
        Family::Type2 => gen_type2(spec, &mut rng),
    }
}

fn gaussian<T: Real>(rows: usize, cols: usize, rng: &mut RandomSource) -> DenseMatrix<T> {
    DenseMatrix::from_fn(rows, cols, |_, _| T::of(rng.gaussian()))
}

/// Gaussian `rows×cols` matrix of rank `rank`, either full or half of the
/// short side by duplicating a block along it.
fn duplicated<T: Real>(
    rows: usize,
    cols: usize,
    rank: usize,
    name: char,
    rng: &mut RandomSource,
) -> Result<DenseMatrix<T>> {
    let short = rows.min(cols);
    if rank == short {
        return Ok(gaussian(rows, cols, rng));
    }
    if !short.is_multiple_of(2) || rank != short / 2 {
        return Err(Error::BadSpec(format!(
            "Type I rank of {name} must be {short} or {short}/2 with an even short side, got {rank}"
        )));
    }
    if cols <= rows {
        let half: DenseMatrix<T> = gaussian(rows, cols / 2, rng);
        half.hstack(&half)
    } else {
        let half: DenseMatrix<T> = gaussian(rows / 2, cols, rng);
        half.vstack(&half)
    }
}

pub fn gen_type1<T: Real>(
    spec: &ProblemSpec,
    rng: &mut RandomSource,
) -> Result<ProblemInstance<T>> {
    if spec.family != Family::Type1 {
        return Err(Error::BadSpec("gen_type1 needs family Type1".into()));
    }
    spec.validate()?;
    let a = duplicated(spec.m, spec.p, spec.rank_a, 'A', rng)?;
    let b = duplicated(spec.q, spec.n, spec.rank_b, 'B', rng)?;
    finish(a, b, spec, rng)
}

/// Matrix with orthonormal columns from two passes of classical Gram-Schmidt
/// over a Gaussian matrix.
pub fn random_orthonormal<T: Real>(
    rows: usize,
    cols: usize,
    rng: &mut RandomSource,
) -> Result<DenseMatrix<T>> {
    if cols == 0 || cols > rows {
        return Err(Error::BadShape(format!(
            "orthonormal {rows}x{cols} needs 1 <= cols <= rows"
        )));
    }
    // Column-major scratch: q[j] is column j.
    let mut q: Vec<Vec<f64>> = (0..cols)
        .map(|_| (0..rows).map(|_| rng.gaussian()).collect())
        .collect();
    for j in 0..cols {
        for _ in 0..2 {
            let coeffs: Vec<f64> = (0..j)
                .map(|k| q[k].iter().zip(&q[j]).map(|(a, b)| a * b).sum())
                .collect();
            for (k, c) in coeffs.into_iter().enumerate() {
                let (done, rest) = q.split_at_mut(j);
                for (v, u) in rest[0].iter_mut().zip(&done[k]) {
                    *v -= c * u;
                }
            }
        }
        let norm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in q[j].iter_mut() {
            *v /= norm;
        }
    }
    Ok(DenseMatrix::from_fn(rows, cols, |i, j| T::of(q[j][i])))
}

/// `U·D·Vᵀ` with `σ_min = 1`, `σ_max = cond` and `rank − 2` interior values
/// uniform in `[1, cond]`.
fn spectral<T: Real>(
    rows: usize,
    cols: usize,
    rank: usize,
    cond: f64,
    name: char,
    rng: &mut RandomSource,
) -> Result<DenseMatrix<T>> {
    if rank < 2 {
        return Err(Error::BadSpec(format!(
            "Type II rank of {name} must be at least 2, got {rank}"
        )));
    }
    let u: DenseMatrix<f64> = random_orthonormal(rows, rank, rng)?;
    let v: DenseMatrix<f64> = random_orthonormal(cols, rank, rng)?;
    let mut d: Vec<f64> = (0..rank - 2)
        .map(|_| 1.0 + (cond - 1.0) * rng.uniform())
        .collect();
    d.push(cond);
    d.push(1.0);
    Ok(DenseMatrix::from_fn(rows, cols, |i, j| {
        T::of((0..rank).map(|k| u[(i, k)] * d[k] * v[(j, k)]).sum())
    }))
}

pub fn gen_type2<T: Real>(
    spec: &ProblemSpec,
    rng: &mut RandomSource,
) -> Result<ProblemInstance<T>> {
    if spec.family != Family::Type2 {
        return Err(Error::BadSpec("gen_type2 needs family Type2".into()));
    }
    spec.validate()?;
    let a = spectral(spec.m, spec.p, spec.rank_a, spec.cond_a, 'A', rng)?;
    let b = spectral(spec.q, spec.n, spec.rank_b, spec.cond_b, 'B', rng)?;
    finish(a, b, spec, rng)
}

fn finish<T: Real>(
    a: DenseMatrix<T>,
    b: DenseMatrix<T>,
    spec: &ProblemSpec,
    rng: &mut RandomSource,
) -> Result<ProblemInstance<T>> {
    let delta = if spec.consistent {
        0.0
    } else {
        spec.noise_delta.unwrap_or(DEFAULT_DELTA)
    };
    let (c, planted_x) = make_rhs(&a, &b, !spec.consistent, delta, rng)?;
    Ok(ProblemInstance {
        a,
        b,
        c,
        planted_x,
        spec: spec.clone(),
    })
}

/// `C = A·X·B`, plus `δ·randn(m, n)` when `noisy`. A zero `delta` draws no
/// noise, so it reproduces the consistent construction exactly.
pub fn make_rhs<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    noisy: bool,
    delta: f64,
    rng: &mut RandomSource,
) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    if noisy && !(0.0..1.0).contains(&delta) {
        return Err(Error::BadSpec(format!(
            "noise_delta {delta} outside [0, 1)"
        )));
    }
    let x = gaussian(a.cols(), b.rows(), rng);
    let mut c = a.matmul(&x)?.matmul(b)?;
    if noisy && delta > 0.0 {
        let d = T::of(delta);
        for v in c.as_mut_slice() {
            *v = *v + d * T::of(rng.gaussian());
        }
    }
    Ok((c, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{numerical_rank, reference_solution, singular_values};

    fn half(spec: ProblemSpec, a: bool, b: bool) -> ProblemSpec {
        ProblemSpec {
            rank_a: if a { spec.rank_a / 2 } else { spec.rank_a },
            rank_b: if b { spec.rank_b / 2 } else { spec.rank_b },
            ..spec
        }
    }

    #[test]
    fn type1_full_rank() {
        let inst: ProblemInstance<f64> =
            generate(&ProblemSpec::type1(100, 40, 40, 100, true, 1)).unwrap();
        assert_eq!(inst.a.shape(), (100, 40));
        assert_eq!(numerical_rank(&inst.a), 40);
        assert_eq!(numerical_rank(&inst.b), 40);
    }

    #[test]
    fn type1_half_rank() {
        let spec = half(ProblemSpec::type1(100, 40, 40, 100, true, 2), true, true);
        let inst: ProblemInstance<f64> = generate(&spec).unwrap();
        assert_eq!(numerical_rank(&inst.a), 20);
        assert_eq!(numerical_rank(&inst.b), 20);
        // Wide A duplicates rows instead.
        let spec = half(ProblemSpec::type1(10, 30, 4, 6, true, 3), true, false);
        let inst: ProblemInstance<f64> = generate(&spec).unwrap();
        assert_eq!(numerical_rank(&inst.a), 5);
    }

    #[test]
    fn type1_odd_half_rank_rejected() {
        let spec = ProblemSpec {
            rank_a: 3,
            ..ProblemSpec::type1(10, 7, 4, 6, true, 3)
        };
        assert!(matches!(generate::<f64>(&spec), Err(Error::BadSpec(_))));
    }

    #[test]
    fn deterministic() {
        let spec = ProblemSpec::type1(12, 5, 4, 9, false, 77);
        assert_eq!(
            generate::<f64>(&spec).unwrap(),
            generate::<f64>(&spec).unwrap()
        );
    }

    #[test]
    fn type2_pinned_spectrum() {
        let spec = ProblemSpec {
            family: Family::Type2,
            cond_a: 2.0,
            cond_b: 5.0,
            rank_a: 50,
            rank_b: 30,
            ..ProblemSpec::type1(80, 60, 30, 70, true, 9)
        };
        let inst: ProblemInstance<f64> = generate(&spec).unwrap();
        let s = singular_values(&inst.a);
        let r = numerical_rank(&inst.a);
        assert_eq!(r, 50);
        assert!((s[0] / s[r - 1] - 2.0).abs() < 1e-10);
        assert!(s[..r]
            .iter()
            .all(|&v| (1.0 - 1e-10..=2.0 + 1e-10).contains(&v)));
        assert_eq!(numerical_rank(&inst.b), 30);
    }

    #[test]
    fn type2_rank_one_rejected() {
        let spec = ProblemSpec {
            family: Family::Type2,
            rank_a: 1,
            ..ProblemSpec::type1(8, 6, 4, 5, true, 9)
        };
        assert!(matches!(generate::<f64>(&spec), Err(Error::BadSpec(_))));
    }

    #[test]
    fn orthonormal_examples() {
        let mut rng = RandomSource::new(5);
        let q: DenseMatrix<f64> = random_orthonormal(3, 3, &mut rng).unwrap();
        let det = q[(0, 0)] * (q[(1, 1)] * q[(2, 2)] - q[(1, 2)] * q[(2, 1)])
            - q[(0, 1)] * (q[(1, 0)] * q[(2, 2)] - q[(1, 2)] * q[(2, 0)])
            + q[(0, 2)] * (q[(1, 0)] * q[(2, 1)] - q[(1, 1)] * q[(2, 0)]);
        assert!((det.abs() - 1.0).abs() < 1e-10);

        let q: DenseMatrix<f64> = random_orthonormal(5, 2, &mut rng).unwrap();
        let g = q.transpose().matmul(&q).unwrap();
        assert!(g.max_abs_diff(&DenseMatrix::identity(2)) < 1e-12);

        let a: DenseMatrix<f64> = random_orthonormal(6, 4, &mut RandomSource::new(1)).unwrap();
        let b: DenseMatrix<f64> = random_orthonormal(6, 4, &mut RandomSource::new(1)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            random_orthonormal::<f64>(2, 3, &mut rng),
            Err(Error::BadShape(_))
        ));
    }

    #[test]
    fn rhs_constructions() {
        let mut rng = RandomSource::new(3);
        let a: DenseMatrix<f64> = gaussian(6, 4, &mut rng);
        let b: DenseMatrix<f64> = gaussian(3, 5, &mut rng);
        let (c, x) = make_rhs(&a, &b, false, 0.0, &mut RandomSource::new(8)).unwrap();
        assert_eq!(a.matmul(&x).unwrap().matmul(&b).unwrap(), c);
        let (c0, _) = make_rhs(&a, &b, true, 0.0, &mut RandomSource::new(8)).unwrap();
        assert_eq!(c0, c);
        let (cn, _) = make_rhs(&a, &b, true, 0.3, &mut RandomSource::new(8)).unwrap();
        assert!(!reference_solution(&a, &b, &cn).unwrap().consistent);
    }

    #[test]
    fn spec_noise_invariant() {
        let mut s = ProblemSpec::type1(4, 3, 3, 4, true, 0);
        s.noise_delta = Some(0.1);
        assert!(s.validate().is_err());
        let mut s = ProblemSpec::type1(4, 3, 3, 4, false, 0);
        s.noise_delta = None;
        assert!(s.validate().is_err());
    }
}
