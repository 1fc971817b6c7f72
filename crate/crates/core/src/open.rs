//! Priority list with O(1) removal by id, shared by all searches.
//!
//! Entries are ordered by `(order key of f, tiebreak, insertion sequence)`.
//! Removal marks the id dead; dead heap entries are skipped on pop and
//! compacted away once they outnumber live ones.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::cost::CostVector;
use crate::planner::OpenOrder;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Entry {
    key: CostVector,
    tiebreak: u64,
    seq: u64,
    id: usize,
}

#[derive(Clone, Debug)]
pub struct OpenList {
    heap: BinaryHeap<Reverse<Entry>>,
    live: Vec<bool>,
    len: usize,
    seq: u64,
    order: OpenOrder,
}

impl OpenList {
    pub fn new(order: OpenOrder) -> Self {
        OpenList { heap: BinaryHeap::new(), live: Vec::new(), len: 0, seq: 0, order }
    }

    /// Inserts `id` with priority `f`; ties broken by smaller `tiebreak`,
    /// then by insertion order.
    pub fn push(&mut self, id: usize, f: &CostVector, tiebreak: u64) {
        if id >= self.live.len() {
            self.live.resize(id + 1, false);
        }
        if self.live[id] {
            return;
        }
        self.live[id] = true;
        self.len += 1;
        self.seq += 1;
        self.heap.push(Reverse(Entry { key: self.order.key(f), tiebreak, seq: self.seq, id }));
    }

    pub fn pop(&mut self) -> Option<usize> {
        while let Some(Reverse(entry)) = self.heap.pop() {
            if std::mem::replace(&mut self.live[entry.id], false) {
                self.len -= 1;
                return Some(entry.id);
            }
        }
        None
    }

    pub fn contains(&self, id: usize) -> bool {
        self.live.get(id).copied().unwrap_or(false)
    }

    /// Returns whether `id` was present.
    pub fn remove(&mut self, id: usize) -> bool {
        match self.live.get_mut(id) {
            Some(alive) if *alive => {
                *alive = false;
                self.len -= 1;
                self.maybe_compact();
                true
            }
            _ => false,
        }
    }

    /// Removes every live id for which `keep` returns false.
    pub fn retain(&mut self, mut keep: impl FnMut(usize) -> bool) {
        let ids: Vec<usize> = self.ids().collect();
        for id in ids {
            if !keep(id) {
                self.live[id] = false;
                self.len -= 1;
            }
        }
        self.maybe_compact();
    }

    /// Live ids in unspecified order.
    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.heap.iter().map(|Reverse(e)| e.id).filter(|&id| self.live[id])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn maybe_compact(&mut self) {
        if self.heap.len() > 64 && self.heap.len() > 2 * self.len {
            let live = &self.live;
            let entries: Vec<_> = std::mem::take(&mut self.heap)
                .into_vec()
                .into_iter()
                .filter(|Reverse(e)| live[e.id])
                .collect();
            self.heap = BinaryHeap::from(entries);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_lexicographically_least_then_tiebreak_then_fifo() {
        let mut open = OpenList::new(OpenOrder::Lexicographic);
        open.push(0, &[2, 1].into(), 0);
        open.push(1, &[1, 9].into(), 5);
        open.push(2, &[1, 9].into(), 3);
        open.push(3, &[1, 9].into(), 3);
        assert_eq!(open.len(), 4);
        assert_eq!(std::iter::from_fn(|| open.pop()).collect::<Vec<_>>(), vec![2, 3, 1, 0]);
    }

    #[test]
    fn reverse_lexicographic() {
        let mut open = OpenList::new(OpenOrder::ReverseLexicographic);
        open.push(0, &[1, 9].into(), 0);
        open.push(1, &[2, 1].into(), 0);
        assert_eq!(open.pop(), Some(1));
    }

    #[test]
    fn removal_and_retain() {
        let mut open = OpenList::new(OpenOrder::Lexicographic);
        for id in 0..100 {
            open.push(id, &[id as u64].into(), 0);
        }
        assert!(open.remove(0));
        assert!(!open.remove(0));
        open.retain(|id| id % 2 == 1);
        assert_eq!(open.len(), 50);
        assert!(!open.contains(2) && open.contains(3));
        assert_eq!(open.pop(), Some(1));
        assert_eq!(open.len(), 49);
    }
}
