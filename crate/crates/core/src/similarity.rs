//! Vector similarity with 64-bit accumulation.

pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum()
}

pub fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; zero vectors have similarity 0 with everything.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        return 0.0;
    }
    (dot(a, b) / denom).clamp(-1.0, 1.0)
}

/// Vectors pre-scaled to unit length, so repeated cosines reduce to dot products.
#[derive(Debug, Clone)]
pub struct UnitVectors {
    rows: Vec<Vec<f64>>,
}

impl UnitVectors {
    pub fn new<'a>(vectors: impl IntoIterator<Item = &'a [f32]>) -> Self {
        let rows = vectors
            .into_iter()
            .map(|v| {
                let n = norm(v);
                if n == 0.0 {
                    vec![0.0; v.len()]
                } else {
                    v.iter().map(|&x| f64::from(x) / n).collect()
                }
            })
            .collect();
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Largest cosine between `v` (already unit length) and any row.
    pub fn max_cosine(&self, v: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    .clamp(-1.0, 1.0)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
