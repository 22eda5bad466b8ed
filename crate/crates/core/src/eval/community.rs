use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Mean intra-community pairwise Euclidean distance divided by the mean
/// inter-community distance. Values well below 1 mean the embedding groups
/// communities together.
pub fn community_separation(embedding: &Matrix, communities: &[usize]) -> Result<f64> {
    let n = embedding.rows();
    if communities.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} community labels for {n} embedded nodes",
            communities.len()
        )));
    }
    let (mut intra, mut n_intra, mut inter, mut n_inter) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            let dist = embedding
                .row(i)
                .iter()
                .zip(embedding.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if communities[i] == communities[j] {
                intra += dist;
                n_intra += 1;
            } else {
                inter += dist;
                n_inter += 1;
            }
        }
    }
    if n_inter == 0 {
        return Err(Error::InvalidParameter("need at least two nonempty communities".into()));
    }
    if n_intra == 0 {
        return Err(Error::InvalidParameter("every community is a singleton".into()));
    }
    let inter = inter / n_inter as f64;
    if inter == 0.0 {
        return Err(Error::InvalidParameter("all embeddings coincide".into()));
    }
    Ok((intra / n_intra as f64) / inter)
}
