use crate::{Error, Real, Result};

/// An embedding produced by some image or text encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector<T> {
    pub values: Vec<T>,
}

impl<T: Real> EmbeddingVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("embedding must be non-empty and finite".into()));
        }
        Ok(EmbeddingVector { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

impl<T: Real> From<Vec<T>> for EmbeddingVector<T> {
    fn from(values: Vec<T>) -> Self {
        EmbeddingVector { values }
    }
}

/// Image embeddings for the three render branches.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipBranches<T> {
    pub glo: EmbeddingVector<T>,
    pub loc: EmbeddingVector<T>,
    pub loc_geo: EmbeddingVector<T>,
}

impl<T> ClipBranches<T> {
    fn iter(&self) -> [&EmbeddingVector<T>; 3] {
        [&self.glo, &self.loc, &self.loc_geo]
    }
}

fn delta<T: Real>(a: &EmbeddingVector<T>, b: &EmbeddingVector<T>) -> Result<Vec<T>> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("embedding dims {} and {}", a.dim(), b.dim())));
    }
    Ok(a.values.iter().zip(&b.values).map(|(&x, &y)| x - y).collect())
}

fn cosine<T: Real>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::Shape(format!("embedding dims {} and {}", u.len(), v.len())));
    }
    let dot: T = u.iter().zip(v).map(|(&a, &b)| a * b).sum();
    let nu = u.iter().map(|&a| a * a).sum::<T>().sqrt();
    let nv = v.iter().map(|&a| a * a).sum::<T>().sqrt();
    if nu == T::zero() || nv == T::zero() {
        return Err(Error::ZeroNorm);
    }
    Ok(dot / (nu * nv))
}

/// Sum over the three branches of the cosine distance between the image
/// direction `r - r_neg` and the text direction `t - t_neg`.
pub fn clip_directional<T: Real>(
    r: &ClipBranches<T>,
    r_neg: &ClipBranches<T>,
    t: &EmbeddingVector<T>,
    t_neg: &EmbeddingVector<T>,
) -> Result<T> {
    let dc = delta(t, t_neg)?;
    let mut total = T::zero();
    for (a, b) in r.iter().into_iter().zip(r_neg.iter()) {
        total += T::one() - cosine(&delta(a, b)?, &dc)?;
    }
    Ok(total)
}

/// Raw cosine between the image and text directions, in [-1, 1].
pub fn mes_dir_cosine<T: Real>(
    image: &EmbeddingVector<T>,
    neg_image: &EmbeddingVector<T>,
    text: &EmbeddingVector<T>,
    neg_text: &EmbeddingVector<T>,
) -> Result<T> {
    cosine(&delta(image, neg_image)?, &delta(text, neg_text)?)
}

/// [`mes_dir_cosine`] scaled by 100.
pub fn mes_dir_score<T: Real>(
    image: &EmbeddingVector<T>,
    neg_image: &EmbeddingVector<T>,
    text: &EmbeddingVector<T>,
    neg_text: &EmbeddingVector<T>,
) -> Result<T> {
    Ok(T::of(100.0) * mes_dir_cosine(image, neg_image, text, neg_text)?)
}

/// Arithmetic mean, not renormalized.
pub fn average_embeddings<T: Real>(vectors: &[EmbeddingVector<T>]) -> Result<EmbeddingVector<T>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot average zero embeddings".into()))?;
    let mut sum = vec![T::zero(); first.dim()];
    for v in vectors {
        if v.dim() != sum.len() {
            return Err(Error::Shape(format!("embedding dims {} and {}", sum.len(), v.dim())));
        }
        sum.iter_mut().zip(&v.values).for_each(|(s, &x)| *s += x);
    }
    let k = T::of(vectors.len() as f64);
    Ok(EmbeddingVector {
        values: sum.into_iter().map(|s| s / k).collect(),
    })
}
