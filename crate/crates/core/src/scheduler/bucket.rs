use super::{SchedulerCounters, SelectionBackend};
use crate::timebase::ActiveTime;

const NIL: u32 = u32::MAX;

/// One distinct active time and the particles waiting for it.
#[derive(Debug, Clone)]
struct TNode {
    time: ActiveTime,
    /// First P-node of the P-list.
    first: u32,
    count: u32,
    next: u32,
}

/// The two-level time-bucket list.
///
/// T-nodes hold one distinct active time each and are linked in strictly
/// ascending order. Each T-node owns a singly linked P-list of the particles
/// with that active time. The head T-node is the only entry point and is
/// always the current minimum, so selecting the active particles reads the
/// head's P-list and nothing else.
///
/// After integration every active particle is reinserted at its new time by
/// walking the T-list from the head: it joins an existing T-node with an equal
/// time, or a new T-node is spliced in where the walk passes its time. Only
/// then is the old head, by now empty, unlinked.
///
/// Each particle is in exactly one P-list, so P-nodes are stored intrusively:
/// the P-node of slot `i` is `pnext[i]`. T-nodes live in an arena with a free
/// list.
#[derive(Debug, Clone)]
pub struct BucketList {
    nodes: Vec<TNode>,
    free: Vec<u32>,
    head: u32,
    pnext: Vec<u32>,
    n_tnodes: usize,
    n_particles: usize,
}

impl BucketList {
    pub fn new(times: &[ActiveTime]) -> Self {
        assert!(!times.is_empty());
        let n = times.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by_key(|&s| (times[s as usize], s));

        let mut list = BucketList {
            nodes: Vec::new(),
            free: Vec::new(),
            head: NIL,
            pnext: vec![NIL; n],
            n_tnodes: 0,
            n_particles: n,
        };
        // Walk from the back so each T-node is prepended in front of the next
        // larger one.
        for &slot in order.iter().rev() {
            let t = times[slot as usize];
            if list.head != NIL && list.nodes[list.head as usize].time == t {
                list.push_pnode(list.head, slot);
            } else {
                let node = list.alloc(t, list.head);
                list.push_pnode(node, slot);
                list.head = node;
            }
        }
        list
    }

    /// Number of T-nodes.
    pub fn n_tnodes(&self) -> usize {
        self.n_tnodes
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    /// `min_t`: the time of the head T-node.
    pub fn head_time(&self) -> ActiveTime {
        self.nodes[self.head as usize].time
    }

    /// `(time, slots)` for every T-node, head first. P-list order is list
    /// order (most recent insertion first).
    pub fn t_list(&self) -> Vec<(ActiveTime, Vec<u32>)> {
        self.tnodes()
            .map(|node| (node.time, self.plist(node).collect()))
            .collect()
    }

    /// Checks the structural invariants: strictly ascending T-list, no empty
    /// T-node, counts consistent, and every particle in exactly one P-list.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = vec![false; self.pnext.len()];
        let mut prev: Option<ActiveTime> = None;
        let mut tnodes = 0;
        let mut particles = 0;
        for node in self.tnodes() {
            tnodes += 1;
            if let Some(p) = prev {
                if node.time <= p {
                    return Err(format!("T-list not ascending: {} after {}", node.time, p));
                }
            }
            prev = Some(node.time);
            if node.count == 0 || node.first == NIL {
                return Err(format!("empty T-node at {}", node.time));
            }
            let mut len = 0;
            for slot in self.plist(node) {
                if std::mem::replace(&mut seen[slot as usize], true) {
                    return Err(format!("slot {slot} appears in two P-lists"));
                }
                len += 1;
            }
            if len != node.count {
                return Err(format!("T-node {} counts {} but holds {}", node.time, node.count, len));
            }
            particles += len as usize;
        }
        if tnodes != self.n_tnodes {
            return Err(format!("n_tnodes {} but list has {}", self.n_tnodes, tnodes));
        }
        if particles != self.n_particles || particles != self.pnext.len() {
            return Err(format!(
                "particle count {} but list holds {} of {}",
                self.n_particles,
                particles,
                self.pnext.len()
            ));
        }
        Ok(())
    }

    fn tnodes(&self) -> impl Iterator<Item = &TNode> + '_ {
        let mut cur = self.head;
        std::iter::from_fn(move || {
            (cur != NIL).then(|| {
                let node = &self.nodes[cur as usize];
                cur = node.next;
                node
            })
        })
    }

    fn plist<'a>(&'a self, node: &TNode) -> impl Iterator<Item = u32> + 'a {
        let mut cur = node.first;
        std::iter::from_fn(move || {
            (cur != NIL).then(|| {
                let slot = cur;
                cur = self.pnext[slot as usize];
                slot
            })
        })
    }

    fn alloc(&mut self, time: ActiveTime, next: u32) -> u32 {
        let node = TNode { time, first: NIL, count: 0, next };
        self.n_tnodes += 1;
        match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    fn push_pnode(&mut self, node: u32, slot: u32) {
        let t = &mut self.nodes[node as usize];
        self.pnext[slot as usize] = t.first;
        t.first = slot;
        t.count += 1;
    }

    /// Attaches `slot` at `time`, walking from the head. `time` must exceed
    /// the head's time.
    fn insert(&mut self, slot: u32, time: ActiveTime, c: &mut SchedulerCounters) {
        let mut prev = self.head;
        loop {
            let next = self.nodes[prev as usize].next;
            if next == NIL {
                let node = self.alloc(time, NIL);
                self.nodes[prev as usize].next = node;
                self.push_pnode(node, slot);
                return;
            }
            c.tnodes_traversed += 1;
            c.comparisons += 1;
            let next_time = self.nodes[next as usize].time;
            if next_time < time {
                prev = next;
            } else if next_time == time {
                self.push_pnode(next, slot);
                return;
            } else {
                let node = self.alloc(time, next);
                self.nodes[prev as usize].next = node;
                self.push_pnode(node, slot);
                return;
            }
        }
    }
}

impl SelectionBackend for BucketList {
    fn select(&mut self, out: &mut Vec<u32>, c: &mut SchedulerCounters) -> ActiveTime {
        let head = &self.nodes[self.head as usize];
        out.extend(self.plist(head));
        c.pnodes_scanned += head.count as u64;
        head.time
    }

    fn apply(&mut self, min_t: ActiveTime, updates: &[(u32, ActiveTime)], c: &mut SchedulerCounters) {
        let old_head = self.head;
        debug_assert_eq!(self.nodes[old_head as usize].time, min_t);
        debug_assert_eq!(self.nodes[old_head as usize].count as usize, updates.len());
        // Reinsertion relinks P-nodes still threaded through the old head's
        // P-list; that list is dead from here on and never read again.
        for &(slot, time) in updates {
            self.insert(slot, time, c);
        }
        let next = self.nodes[old_head as usize].next;
        debug_assert_ne!(next, NIL);
        self.head = next;
        self.free.push(old_head);
        self.n_tnodes -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timebase::TickTime;

    fn t(num: u64, log2_den: u32) -> ActiveTime {
        TickTime::dyadic(num, log2_den).unwrap()
    }

    #[test]
    fn construction_groups_equal_times() {
        // slots 0..4 at 1/4, 1/2, 1/2, 1
        let list = BucketList::new(&[t(1, 2), t(1, 1), t(1, 1), t(1, 0)]);
        list.check_invariants().unwrap();
        assert_eq!(list.n_tnodes(), 3);
        let tl = list.t_list();
        assert_eq!(tl[0].0, t(1, 2));
        assert_eq!(tl[1].1.len(), 2);
        assert_eq!(tl[2].1, vec![3]);
    }

    #[test]
    fn insertion_splices_at_front_middle_and_back() {
        let mut list = BucketList::new(&[t(1, 3), t(1, 3), t(1, 3), t(4, 3)]);
        let mut c = SchedulerCounters::default();
        let mut out = Vec::new();
        let min_t = list.select(&mut out, &mut c);
        assert_eq!(c.pnodes_scanned, 3);
        // New head-of-list time 1/4, one equal to the existing 1/2, one past the tail.
        list.apply(min_t, &[(0, t(2, 3)), (1, t(4, 3)), (2, t(8, 3))], &mut c);
        list.check_invariants().unwrap();
        let times: Vec<_> = list.t_list().into_iter().map(|(t, _)| t).collect();
        assert_eq!(times, vec![t(2, 3), t(4, 3), t(8, 3)]);
        assert_eq!(list.t_list()[1].1.len(), 2);
    }

    #[test]
    fn freed_tnodes_are_reused() {
        let mut list = BucketList::new(&[t(1, 3), t(2, 3)]);
        let mut c = SchedulerCounters::default();
        for step in 1..=20u64 {
            let mut out = Vec::new();
            let min_t = list.select(&mut out, &mut c);
            let updates: Vec<_> = out.iter().map(|&s| (s, t(step + 2, 3))).collect();
            list.apply(min_t, &updates, &mut c);
            list.check_invariants().unwrap();
        }
        assert!(list.nodes.len() <= 3);
    }
}
