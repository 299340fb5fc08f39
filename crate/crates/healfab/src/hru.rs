//! Hybrid redundancy unit: the triple-register input stage in front of
//! every function block input.
//!
//! Each half-tick the unit latches the incoming wire into all three
//! replica registers, so a corrupted replica never survives past its own
//! cycle and the unit masks transients for an unlimited number of times.
//! Per-replica detectors compare each register against the 2-of-3
//! majority; when the active replica is the corrupt one, the monitoring
//! switch rotates to the lowest-index healthy replica.

use crate::word::Word;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct HruState {
    pub replicas: [Word; 3],
    pub detector_flags: [bool; 3],
    /// Which replica the monitoring switch currently forwards.
    pub active_replica: usize,
    /// Output of the majority comparator, i.e. the value the block sees.
    pub comparator_out: Word,
    /// One-shot corruption masks installed by fault injection, XORed into
    /// the named replica at the next latch and then cleared.
    pub pending_upsets: [Option<u16>; 3],
}

impl Default for HruState {
    fn default() -> HruState {
        HruState {
            replicas: [Word::ZERO; 3],
            detector_flags: [false; 3],
            active_replica: 0,
            comparator_out: Word::ZERO,
            pending_upsets: [None; 3],
        }
    }
}

/// What one latch cycle observed.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HruOutcome {
    Clean,
    /// A minority of replicas disagreed; the output is the majority value.
    /// `rotated` is set when the active replica was the corrupt one and the
    /// switch moved off it.
    Masked { rotated: bool },
    /// All three replicas disagree pairwise; the output falls back to the
    /// active replica and cannot be trusted.
    Unmaskable,
}

fn majority(r: &[Word; 3]) -> Option<Word> {
    if r[0] == r[1] || r[0] == r[2] {
        Some(r[0])
    } else if r[1] == r[2] {
        Some(r[1])
    } else {
        None
    }
}

/// Latch `incoming` into all three replicas (applying any pending injected
/// upsets), run the detectors, and produce the comparator output.
pub fn hru_step(hru: &mut HruState, incoming: Word) -> (Word, HruOutcome) {
    for i in 0..3 {
        let mask = hru.pending_upsets[i].take().unwrap_or(0);
        hru.replicas[i] = Word(incoming.0 ^ mask);
    }
    match majority(&hru.replicas) {
        Some(maj) => {
            let mut any = false;
            for i in 0..3 {
                hru.detector_flags[i] = hru.replicas[i] != maj;
                any |= hru.detector_flags[i];
            }
            hru.comparator_out = maj;
            if !any {
                return (maj, HruOutcome::Clean);
            }
            let rotated = hru.detector_flags[hru.active_replica];
            if rotated {
                hru.active_replica = (0..3)
                    .find(|&i| !hru.detector_flags[i])
                    .expect("majority implies at least two healthy replicas");
            }
            (maj, HruOutcome::Masked { rotated })
        }
        None => {
            hru.detector_flags = [true; 3];
            hru.comparator_out = hru.replicas[hru.active_replica];
            (hru.comparator_out, HruOutcome::Unmaskable)
        }
    }
}
