use crate::gsat::Trace;

/// A nonempty hill-climbing region `H_j` covering flips `start..end`
/// (zero-based flip positions).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub j: u32,
    pub start: usize,
    pub end: usize,
}

impl Region {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseSegmentation {
    /// Nonempty regions, highest `j` first.
    pub regions: Vec<Region>,
    /// Labels `1..=max_j` whose region is empty.
    pub empty: Vec<u32>,
    /// First flip with delta below 1, or the trace length. `H_0` is
    /// `climb_end..len`.
    pub climb_end: usize,
    pub len: usize,
}

impl PhaseSegmentation {
    pub fn region(&self, j: u32) -> Option<&Region> {
        self.regions.iter().find(|r| r.j == j)
    }

    /// Largest label considered (the biggest delta seen while climbing).
    pub fn max_j(&self) -> u32 {
        let nonempty = self.regions.first().map_or(0, |r| r.j);
        nonempty.max(self.empty.iter().copied().max().unwrap_or(0))
    }
}

/// Split a delta sequence into hill-climbing regions.
///
/// `H_j` runs from the first flip of size exactly `j` up to (not including)
/// the first flip of size below `j`; it is empty when a flip below `j` comes
/// first or no flip of size `j` exists before the climb ends.
pub fn segment_deltas(deltas: &[i32]) -> PhaseSegmentation {
    let climb_end = deltas.iter().position(|&d| d < 1).unwrap_or(deltas.len());
    let climb = &deltas[..climb_end];
    let max_j = climb.iter().copied().max().unwrap_or(0).max(0) as u32;

    let mut regions = Vec::new();
    let mut empty = Vec::new();
    for j in (1..=max_j).rev() {
        let j_i = j as i32;
        // any flip below 1 ends the climb, so the search for "below j" stops there too
        let first_below = climb.iter().position(|&d| d < j_i).unwrap_or(climb_end);
        match climb[..first_below].iter().position(|&d| d == j_i) {
            Some(start) => regions.push(Region {
                j,
                start,
                end: first_below,
            }),
            None => empty.push(j),
        }
    }
    empty.reverse();
    PhaseSegmentation {
        regions,
        empty,
        climb_end,
        len: deltas.len(),
    }
}

pub fn segment_phases(trace: &Trace) -> PhaseSegmentation {
    let deltas: Vec<i32> = trace.deltas().collect();
    segment_deltas(&deltas)
}
