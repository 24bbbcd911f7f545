use crate::domain::PolytopeDomain;
use crate::error::{Error, Result};
use crate::objectives::Utility;

use super::meta::{Algorithm1, PlayedRound};

#[derive(Debug, Clone)]
pub struct BlockedRun {
    /// The point played at every original round.
    pub points: Vec<Vec<f64>>,
    /// One algorithm1 round per block.
    pub blocks: Vec<PlayedRound>,
    pub block_size: usize,
}

/// Splits the (already ordered) sequence into consecutive blocks of `w`
/// functions, runs one algorithm1 round per block average and replays the
/// block's point for each of its rounds. A short final block is averaged over
/// its own length.
pub fn blocked_random_order_run(
    fs: &[Utility],
    domain: &PolytopeDomain,
    w: usize,
    mu: f64,
    k: usize,
) -> Result<BlockedRun> {
    if fs.is_empty() {
        return Err(Error::InvalidParameter("empty function sequence".into()));
    }
    if w == 0 || w > fs.len() {
        return Err(Error::InvalidParameter(format!(
            "block size {w} must lie in [1, {}]",
            fs.len()
        )));
    }
    let mut learner = Algorithm1::algorithm1(domain.dim(), k, mu)?;
    let mut points = Vec::with_capacity(fs.len());
    let mut blocks = Vec::with_capacity(fs.len().div_ceil(w));
    for chunk in fs.chunks(w) {
        let avg = Utility::average(chunk)?;
        let played = learner.step(domain, &avg)?;
        points.extend(std::iter::repeat_n(played.x.clone(), chunk.len()));
        blocks.push(played);
    }
    Ok(BlockedRun {
        points,
        blocks,
        block_size: w,
    })
}
