//! The flow grammar: which stage may pass a thing to which.

use crate::model::StageKind;
use StageKind::*;

/// Ordered stage pairs a flow may connect inside one machine.
///
/// Anything else, including a stage flowing into itself, is rejected. A
/// process stage that should cause creation is expressed with a trigger.
pub const INTRA_MACHINE_FLOWS: [(StageKind, StageKind); 7] = [
    (Create, Process),
    (Create, Release),
    (Process, Release),
    (Receive, Process),
    (Receive, Release),
    (Release, Transfer),
    (Transfer, Receive),
];

pub fn allows(from: StageKind, to: StageKind) -> bool {
    INTRA_MACHINE_FLOWS.contains(&(from, to))
}

/// Things enter and leave machines only through their transfer stage.
pub fn allows_between_machines(from: StageKind, to: StageKind) -> bool {
    from == Transfer && to == Transfer
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighteen_pairs_are_rejected() {
        let rejected = StageKind::ALL
            .iter()
            .flat_map(|a| StageKind::ALL.iter().map(move |b| (*a, *b)))
            .filter(|(a, b)| !allows(*a, *b))
            .count();
        assert_eq!(rejected, 18);
        assert!(StageKind::ALL.iter().all(|k| !allows(*k, *k)));
    }
}
