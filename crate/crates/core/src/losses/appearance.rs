use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::{Error, Real, Result};

/// A set of feature vectors (`M x C`), e.g. a flattened feature map or the
/// per-vertex attributes of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet<T> {
    pub vectors: Array2<T>,
    /// Adds the Euclidean term to the transport cost (raw color inputs).
    pub is_rgb: bool,
}

impl<T: Real> FeatureSet<T> {
    pub fn new(vectors: Array2<T>, is_rgb: bool) -> Result<Self> {
        if vectors.nrows() == 0 {
            return Err(Error::InvalidArgument("feature set is empty".into()));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("feature set has non-finite entries".into()));
        }
        Ok(FeatureSet { vectors, is_rgb })
    }

    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.nrows() == 0
    }

    pub fn channels(&self) -> usize {
        self.vectors.ncols()
    }
}

fn check_pair<T: Real>(a: &FeatureSet<T>, b: &FeatureSet<T>) -> Result<()> {
    if a.channels() != b.channels() {
        return Err(Error::Shape(format!("feature sets have {} and {} channels", a.channels(), b.channels())));
    }
    if a.is_rgb != b.is_rgb {
        return Err(Error::InvalidArgument("feature sets disagree on is_rgb".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("feature set is empty".into()));
    }
    Ok(())
}

/// `1 - u.v / (|u| |v|)`.
pub fn cosine_distance<T: Real>(u: ArrayView1<T>, v: ArrayView1<T>) -> Result<T> {
    let (nu, nv) = (u.dot(&u).sqrt(), v.dot(&v).sqrt());
    if nu == T::zero() || nv == T::zero() {
        return Err(Error::ZeroNorm);
    }
    Ok(T::one() - u.dot(&v) / (nu * nv))
}

struct Prepared<T> {
    vectors: Array2<T>,
    norms: Array1<T>,
}

fn prepare<T: Real>(f: &FeatureSet<T>) -> Result<Prepared<T>> {
    let norms = f.vectors.map_axis(Axis(1), |r| r.dot(&r).sqrt());
    if norms.iter().any(|&n| n == T::zero()) {
        return Err(Error::ZeroNorm);
    }
    Ok(Prepared {
        vectors: f.vectors.clone(),
        norms,
    })
}

/// Transport cost between rows `i` of `a` and `j` of `b`.
#[inline]
fn cost<T: Real>(a: &Prepared<T>, i: usize, b: &Prepared<T>, j: usize, rgb: bool) -> T {
    let (u, v) = (a.vectors.row(i), b.vectors.row(j));
    let mut c = T::one() - u.dot(&v) / (a.norms[i] * b.norms[j]);
    if rgb {
        let d2: T = u.iter().zip(v.iter()).map(|(&x, &y)| (x - y) * (x - y)).sum();
        c += d2.sqrt();
    }
    c
}

/// For each row of `from`, the cheapest row of `to` and its cost.
fn nearest<T: Real>(from: &Prepared<T>, to: &Prepared<T>, rgb: bool) -> Vec<(usize, T)> {
    (0..from.vectors.nrows())
        .map(|i| {
            let mut best = (0, cost(from, i, to, 0, rgb));
            for j in 1..to.vectors.nrows() {
                let c = cost(from, i, to, j, rgb);
                if c < best.1 {
                    best = (j, c);
                }
            }
            best
        })
        .collect()
}

fn mean_cost<T: Real>(matches: &[(usize, T)]) -> T {
    matches.iter().map(|m| m.1).sum::<T>() / T::of(matches.len() as f64)
}

/// One direction of the relaxed transport distance: the mean over rows of
/// `a` of the cheapest match in `b`.
pub fn relaxed_w<T: Real>(a: &FeatureSet<T>, b: &FeatureSet<T>) -> Result<T> {
    check_pair(a, b)?;
    Ok(mean_cost(&nearest(&prepare(a)?, &prepare(b)?, a.is_rgb)))
}

/// Symmetric relaxed transport distance `max(W(A,B), W(B,A))`.
pub fn l_w<T: Real>(a: &FeatureSet<T>, b: &FeatureSet<T>) -> Result<T> {
    Ok(relaxed_w(a, b)?.max(relaxed_w(b, a)?))
}

/// Gradient of the cost `c(a, b)` with respect to `a`.
fn cost_grad<T: Real>(a: ArrayView1<T>, na: T, b: ArrayView1<T>, nb: T, rgb: bool, out: &mut [T]) {
    let ab = a.dot(&b);
    let inv = T::one() / (na * nb);
    let k = ab / (na * na * na * nb);
    for (o, (&x, &y)) in out.iter_mut().zip(a.iter().zip(b.iter())) {
        *o = -(y * inv - x * k);
    }
    if rgb {
        let d: T = a.iter().zip(b.iter()).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt();
        if d > T::zero() {
            for (o, (&x, &y)) in out.iter_mut().zip(a.iter().zip(b.iter())) {
                *o += (x - y) / d;
            }
        }
    }
}

/// `l_w(a, b)` and its (sub)gradient with respect to the rows of `a`.
/// Ties between the two directions take `W(A,B)`.
pub fn l_w_grad<T: Real>(a: &FeatureSet<T>, b: &FeatureSet<T>) -> Result<(T, Array2<T>)> {
    check_pair(a, b)?;
    let (pa, pb) = (prepare(a)?, prepare(b)?);
    let ab = nearest(&pa, &pb, a.is_rgb);
    let ba = nearest(&pb, &pa, a.is_rgb);
    let (wab, wba) = (mean_cost(&ab), mean_cost(&ba));
    let mut grad = Array2::zeros(a.vectors.raw_dim());
    let mut buf = vec![T::zero(); a.channels()];
    if wab >= wba {
        let scale = T::one() / T::of(ab.len() as f64);
        for (i, &(j, _)) in ab.iter().enumerate() {
            cost_grad(pa.vectors.row(i), pa.norms[i], pb.vectors.row(j), pb.norms[j], a.is_rgb, &mut buf);
            grad.row_mut(i).iter_mut().zip(&buf).for_each(|(g, &d)| *g += d * scale);
        }
        Ok((wab, grad))
    } else {
        let scale = T::one() / T::of(ba.len() as f64);
        for (j, &(i, _)) in ba.iter().enumerate() {
            cost_grad(pa.vectors.row(i), pa.norms[i], pb.vectors.row(j), pb.norms[j], a.is_rgb, &mut buf);
            grad.row_mut(i).iter_mut().zip(&buf).for_each(|(g, &d)| *g += d * scale);
        }
        Ok((wba, grad))
    }
}

fn moments<T: Real>(f: &FeatureSet<T>) -> (Array1<T>, Array2<T>) {
    let m = f.len();
    let mean = f.vectors.mean_axis(Axis(0)).unwrap();
    let c = f.channels();
    let mut cov = Array2::zeros((c, c));
    if m > 1 {
        let centered = &f.vectors - &mean.view().insert_axis(Axis(0));
        cov = centered.t().dot(&centered) / T::of((m - 1) as f64);
    }
    (mean, cov)
}

fn l1<'a, T: Real>(a: impl IntoIterator<Item = &'a T>, b: impl IntoIterator<Item = &'a T>) -> T {
    a.into_iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum()
}

/// Moment matching: `(1/C) |m_A - m_B|_1 + (1/C^2) |T_A - T_B|_1` with sample
/// covariance (`M - 1` denominator, zero for a single vector).
pub fn l_m<T: Real>(a: &FeatureSet<T>, b: &FeatureSet<T>) -> Result<T> {
    check_pair(a, b)?;
    let c = T::of(a.channels() as f64);
    let (ma, ta) = moments(a);
    let (mb, tb) = moments(b);
    Ok(l1(&ma, &mb) / c + l1(&ta, &tb) / (c * c))
}

fn sign<T: Real>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// `l_m(a, b)` and its (sub)gradient with respect to the rows of `a`.
pub fn l_m_grad<T: Real>(a: &FeatureSet<T>, b: &FeatureSet<T>) -> Result<(T, Array2<T>)> {
    check_pair(a, b)?;
    let (m, ch) = (a.len(), a.channels());
    let c = T::of(ch as f64);
    let (ma, ta) = moments(a);
    let (mb, tb) = moments(b);
    let value = l1(&ma, &mb) / c + l1(&ta, &tb) / (c * c);

    let mean_g = (&ma - &mb).mapv(sign) / (c * T::of(m as f64));
    let mut grad = Array2::zeros((m, ch));
    grad += &mean_g.view().insert_axis(Axis(0));
    if m > 1 {
        let s = (&ta - &tb).mapv(sign);
        let sym = (&s + &s.t()) / (c * c * T::of((m - 1) as f64));
        let centered = &a.vectors - &ma.view().insert_axis(Axis(0));
        grad += &centered.dot(&sym);
    }
    Ok((value, grad))
}

/// Multi-view, multi-layer appearance loss. `views[k]` holds the
/// `(generated, target)` feature pairs of every layer for view `k`; the sum
/// over views is divided by the number of views.
pub fn appearance_im<T: Real>(views: &[Vec<(FeatureSet<T>, FeatureSet<T>)>]) -> Result<T> {
    if views.is_empty() {
        return Err(Error::InvalidArgument("appearance loss needs at least one view".into()));
    }
    let mut total = T::zero();
    for layers in views {
        for (a, b) in layers {
            total += l_w(a, b)? + l_m(a, b)?;
        }
    }
    Ok(total / T::of(views.len() as f64))
}
