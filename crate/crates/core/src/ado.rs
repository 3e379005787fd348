//! Absent depth observations (ADO).
//!
//! Each pixel tracks `P_A`, an exponentially smoothed rate of ADO readings.
//! ADO readings are replaced by the last valid depth, the very first frame is
//! bootstrapped by inpainting, and a fresh ADO on a pixel with low `P_A` is
//! labelled undefined rather than forced into background or foreground.

use std::collections::VecDeque;

use crate::error::{GsmError, Result};
use crate::frame::DepthFrame;

/// Per-pixel ADO probability. Starts at 0.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AdoState {
    pub prob: f64,
}

impl AdoState {
    /// `prob' = alpha * mask + (1 - alpha) * prob`.
    #[inline]
    pub fn update(&mut self, alpha: f64, is_ado: bool) {
        let mask = if is_ado { 1.0 } else { 0.0 };
        self.prob = alpha * mask + (1.0 - alpha) * self.prob;
    }

    #[inline]
    pub fn is_undefined(&self, theta: f64, is_ado: bool) -> bool {
        is_undefined(*self, theta, is_ado)
    }
}

pub fn update_ado(state: AdoState, alpha: f64, is_ado: bool) -> AdoState {
    let mut next = state;
    next.update(alpha, is_ado);
    next
}

/// An ADO reading on a pixel that rarely lacks depth.
#[inline]
pub fn is_undefined(state: AdoState, theta: f64, is_ado: bool) -> bool {
    is_ado && state.prob < theta
}

/// Replaces an ADO reading with the last valid depth and records the result
/// as the new last valid depth.
#[inline]
pub fn substitute_ado(current: u16, last_valid: &mut u16) -> u16 {
    if current != DepthFrame::ADO {
        *last_valid = current;
    }
    *last_valid
}

const NEIGHBORS: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Fills every ADO pixel of `frame` from the valid region.
///
/// Holes are filled in order of increasing (8-connected) distance to the
/// valid region, each from the inverse-distance-weighted mean of its already
/// known 8-neighbours. Filled values stay within the range of the valid input.
pub fn inpaint_initial_depth(frame: &DepthFrame) -> Result<DepthFrame> {
    let (w, h) = frame.dims();
    if frame.values.iter().all(|&v| v == DepthFrame::ADO) {
        return Err(GsmError::NoValidSupport);
    }
    let mut out = frame.clone();
    if !out.values.contains(&DepthFrame::ADO) {
        return Ok(out);
    }

    let idx = |x: usize, y: usize| y * w + x;
    let neighbor = |i: usize, (dx, dy): (isize, isize)| -> Option<usize> {
        let x = (i % w) as isize + dx;
        let y = (i / w) as isize + dy;
        (x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h).then(|| idx(x as usize, y as usize))
    };

    // Distance layers by breadth-first search from the valid region.
    const UNSEEN: u32 = u32::MAX;
    let mut dist = vec![UNSEEN; w * h];
    let mut queue = VecDeque::new();
    for (i, &v) in frame.values.iter().enumerate() {
        if v != DepthFrame::ADO {
            dist[i] = 0;
        }
    }
    for i in 0..w * h {
        if dist[i] == UNSEEN && NEIGHBORS.iter().any(|&o| neighbor(i, o).is_some_and(|j| dist[j] == 0)) {
            dist[i] = 1;
            queue.push_back(i);
        }
    }
    let mut order = Vec::with_capacity(out.ado_count());
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for &o in &NEIGHBORS {
            if let Some(j) = neighbor(i, o) {
                if dist[j] == UNSEEN {
                    dist[j] = dist[i] + 1;
                    queue.push_back(j);
                }
            }
        }
    }
    // BFS already yields nondecreasing distance; a stable sort keeps the
    // raster order within each layer independent of queue mechanics.
    order.sort_by_key(|&i| (dist[i], i));

    let mut known: Vec<bool> = dist.iter().map(|&d| d == 0).collect();
    for i in order {
        let mut acc = 0.0;
        let mut weight = 0.0;
        for &(dx, dy) in &NEIGHBORS {
            if let Some(j) = neighbor(i, (dx, dy)) {
                if known[j] {
                    let wgt = if dx == 0 || dy == 0 {
                        1.0
                    } else {
                        std::f64::consts::FRAC_1_SQRT_2
                    };
                    acc += wgt * out.values[j] as f64;
                    weight += wgt;
                }
            }
        }
        debug_assert!(weight > 0.0);
        out.values[i] = (acc / weight).round() as u16;
        known[i] = true;
    }
    Ok(out)
}
