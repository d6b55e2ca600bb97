//! Per-pixel, per-class score tensors from the semantic branch.

use crate::error::{Error, Result};
use crate::par;

/// H×W×C score tensor, row-major with the channel axis innermost.
/// `channel_order[c]` is the class id of channel `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticScoreMap {
    height: u32,
    width: u32,
    channel_order: Vec<u32>,
    data: Vec<f32>,
}

impl SemanticScoreMap {
    pub fn new(height: u32, width: u32, channel_order: Vec<u32>, data: Vec<f32>) -> Result<Self> {
        let channels = channel_order.len();
        let expected = height as usize * width as usize * channels;
        if data.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "score data has {} values, expected {}x{}x{} = {}",
                data.len(),
                height,
                width,
                channels,
                expected
            )));
        }
        let mut seen = channel_order.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != channel_order.len() {
            return Err(Error::InvalidArgument(
                "channel_order contains duplicate class ids".into(),
            ));
        }
        Ok(Self {
            height,
            width,
            channel_order,
            data,
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channel_order.len()
    }

    pub fn n_pixels(&self) -> usize {
        self.height as usize * self.width as usize
    }

    pub fn channel_order(&self) -> &[u32] {
        &self.channel_order
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Scores of one pixel, `channels()` long.
    pub fn pixel(&self, pixel: usize) -> &[f32] {
        let c = self.channels();
        &self.data[pixel * c..(pixel + 1) * c]
    }

    /// Channel index of the given class id, if present.
    pub fn channel_of(&self, class_id: u32) -> Option<usize> {
        self.channel_order.iter().position(|&id| id == class_id)
    }

    /// True when every value lies in [0, 1] and every pixel's scores sum
    /// to 1 within 1e-6, i.e. the map is already a per-pixel distribution.
    pub fn is_normalized(&self) -> bool {
        let c = self.channels();
        if c == 0 {
            return false;
        }
        self.data.chunks_exact(c).all(pixel_is_distribution)
    }
}

pub(crate) fn pixel_is_distribution(px: &[f32]) -> bool {
    let mut sum = 0.0f64;
    for &v in px {
        if !(0.0..=1.0).contains(&v) {
            return false;
        }
        sum += v as f64;
    }
    (sum - 1.0).abs() <= 1e-6
}

/// In-place per-pixel softmax, accumulating in f64.
pub(crate) fn softmax_pixel(px: &mut [f32]) {
    let mut max = f32::NEG_INFINITY;
    for &v in px.iter() {
        if v > max {
            max = v;
        }
    }
    let mut sum = 0.0f64;
    let mut exps = [0.0f64; 128];
    let spill;
    if px.len() <= exps.len() {
        for (i, &v) in px.iter().enumerate() {
            let e = ((v - max) as f64).exp();
            exps[i] = e;
            sum += e;
        }
        spill = None;
    } else {
        let mut big = Vec::with_capacity(px.len());
        for &v in px.iter() {
            let e = ((v - max) as f64).exp();
            big.push(e);
            sum += e;
        }
        spill = Some(big);
    }
    let inv = 1.0 / sum;
    match spill {
        None => {
            for (i, v) in px.iter_mut().enumerate() {
                *v = (exps[i] * inv) as f32;
            }
        }
        Some(big) => {
            for (v, e) in px.iter_mut().zip(big) {
                *v = (e * inv) as f32;
            }
        }
    }
}

/// Turn raw scores into a per-pixel probability distribution.
///
/// Raw branch outputs are logits, so a per-pixel softmax is applied. A map
/// that is already a distribution (every pixel sums to 1 within 1e-6, all
/// values in [0, 1]) is returned unchanged: re-applying a softmax to
/// probabilities would flatten them and shift the meaning of the
/// stuff-substitution threshold. This also makes the operation idempotent.
pub fn normalize_scores(scores: &SemanticScoreMap) -> Result<SemanticScoreMap> {
    let c = scores.channels();
    if c == 0 {
        return Err(Error::InvalidArgument("score map has zero channels".into()));
    }
    if let Some(bad) = scores.data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteScore {
            pixel: bad / c,
            channel: bad % c,
        });
    }
    let mut out = scores.clone();
    if out.is_normalized() {
        return Ok(out);
    }
    par::for_each_chunk_mut(&mut out.data, c, |_, px| softmax_pixel(px));
    Ok(out)
}

/// Per-pixel argmax class id. Ties break to the lowest channel index.
pub fn argmax_map(scores: &SemanticScoreMap) -> Vec<u32> {
    let c = scores.channels();
    let order = scores.channel_order();
    par::map_indexed(scores.n_pixels(), |p| {
        order[argmax_channel(&scores.data[p * c..(p + 1) * c])]
    })
}

pub(crate) fn argmax_channel(px: &[f32]) -> usize {
    let mut best = 0;
    let mut best_v = px[0];
    for (i, &v) in px.iter().enumerate().skip(1) {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}
