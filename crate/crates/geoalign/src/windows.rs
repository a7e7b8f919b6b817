//! Pooling consecutive 10 m pieces into overlapping 100 m windows.

use roadrough_core::AlignedSegment;
use serde::{Deserialize, Serialize};

use crate::align::AlignedPiece;
use crate::error::Result;

pub const PIECES_PER_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowReport {
    pub pieces: usize,
    pub windows: usize,
    /// Window positions skipped because they contain a dropped piece.
    pub skipped: usize,
}

/// Windows of `PIECES_PER_WINDOW` consecutive pieces advancing one piece at a
/// time. The window id is the position of its first piece.
pub fn sliding_windows(pieces: &[Option<AlignedPiece>]) -> Result<(Vec<AlignedSegment>, WindowReport)> {
    let w = PIECES_PER_WINDOW;
    let mut out = Vec::new();
    let mut report = WindowReport { pieces: pieces.len(), ..Default::default() };
    if pieces.len() >= w {
        for start in 0..=pieces.len() - w {
            let Some(group) = pieces[start..start + w].iter().map(Option::as_ref).collect::<Option<Vec<&AlignedPiece>>>() else {
                report.skipped += 1;
                continue;
            };
            let iri = group.iter().map(|p| p.iri).sum::<f64>() / w as f64;
            let t = group.iter().flat_map(|p| p.t.iter().copied()).collect();
            let acc = group.iter().flat_map(|p| p.acc_z.iter().copied()).collect();
            let speed = group.iter().flat_map(|p| p.speed.iter().copied()).collect();
            out.push(AlignedSegment::new(start, t, acc, speed, iri)?);
        }
    }
    report.windows = out.len();
    if out.is_empty() {
        log::warn!("no run of {w} consecutive aligned pieces; no windows produced");
    }
    Ok((out, report))
}
