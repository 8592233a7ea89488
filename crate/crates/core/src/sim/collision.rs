//! Physical collision rules for upstream bursts.

use alloc::vec;
use alloc::vec::Vec;

use crate::time::Time;
use crate::topology::{GroupId, OnuId, ReceiverId};

use super::Architecture;

/// One upstream burst as it reaches the OLT. `end - start` covers the guard
/// time and the payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub onu: OnuId,
    pub group: GroupId,
    pub receiver: ReceiverId,
    pub start: Time,
    pub end: Time,
    pub bytes: u64,
}

impl Transmission {
    pub fn overlaps(&self, other: &Transmission) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Why a transmission was lost. Both flags can be set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Loss {
    pub receiver: bool,
    pub group: bool,
}

impl Loss {
    pub fn is_lost(&self) -> bool {
        self.receiver || self.group
    }
}

/// Marks every transmission that overlaps another one in a shared collision
/// domain. Receivers are always a domain; groups are one only under
/// [`Architecture::FlexibleSecure`].
pub fn detect_collisions(txs: &[Transmission], architecture: Architecture) -> Vec<Loss> {
    let mut loss = vec![Loss::default(); txs.len()];
    for i in sweep(txs, |t| t.receiver.0) {
        loss[i].receiver = true;
    }
    if architecture == Architecture::FlexibleSecure {
        for i in sweep(txs, |t| t.group.0) {
            loss[i].group = true;
        }
    }
    loss
}

/// Indices of transmissions that overlap another one with the same key.
fn sweep(txs: &[Transmission], key: impl Fn(&Transmission) -> u32) -> Vec<usize> {
    let mut order: Vec<usize> = (0..txs.len()).collect();
    order.sort_by_key(|&i| (key(&txs[i]), txs[i].start, txs[i].end));
    let mut hit = Vec::new();
    let mut reach: Option<(u32, Time)> = None;
    for (pos, &i) in order.iter().enumerate() {
        let t = &txs[i];
        let k = key(t);
        // Latest end among earlier starts in this domain.
        let before = matches!(reach, Some((rk, end)) if rk == k && end > t.start);
        // Later starts are sorted, so the next one is the earliest candidate.
        let after = order.get(pos + 1).is_some_and(|&j| key(&txs[j]) == k && txs[j].start < t.end);
        if before || after {
            hit.push(i);
        }
        reach = match reach {
            Some((rk, end)) if rk == k => Some((k, end.max(t.end))),
            _ => Some((k, t.end)),
        };
    }
    hit
}
