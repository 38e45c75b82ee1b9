//! Timestamped event records emitted by simulated builds.

use serde::{Deserialize, Serialize};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Herald {
    Success,
    Failure,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    AttemptStarted,
    Heralded(Herald),
    FragmentComplete,
    FragmentDamaged,
    TransferDone,
    ReadoutDone,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EventKind::AttemptStarted => write!(f, "attempt_started"),
            EventKind::Heralded(Herald::Success) => write!(f, "heralded_success"),
            EventKind::Heralded(Herald::Failure) => write!(f, "heralded_failure"),
            EventKind::FragmentComplete => write!(f, "fragment_complete"),
            EventKind::FragmentDamaged => write!(f, "fragment_damaged"),
            EventKind::TransferDone => write!(f, "transfer_done"),
            EventKind::ReadoutDone => write!(f, "readout_done"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t_ns: f64,
    pub kind: EventKind,
    pub nodes: Vec<usize>,
    pub fragment: Option<u64>,
}

impl Event {
    pub fn new(t_ns: f64, kind: EventKind, nodes: Vec<usize>, fragment: Option<u64>) -> Self {
        Self {
            t_ns,
            kind,
            nodes,
            fragment,
        }
    }
}

impl std::fmt::Display for Event {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.3} {} nodes=", self.t_ns, self.kind)?;
        let mut first = true;
        for v in &self.nodes {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        if let Some(id) = self.fragment {
            write!(f, " fragment={id}")?;
        }
        Ok(())
    }
}

/// Per-trial ordered event trace.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog(pub Vec<Event>);

impl EventLog {
    pub fn push(&mut self, event: Event) {
        self.0.push(event);
    }

    pub fn extend(&mut self, events: impl IntoIterator<Item = Event>) {
        self.0.extend(events);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Event> {
        self.0.iter()
    }

    pub fn timestamps_nondecreasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0].t_ns <= w[1].t_ns)
    }

    /// Deterministic text rendering, one event per line.
    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for e in &self.0 {
            writeln!(out, "{e}").expect("string write");
        }
        out
    }
}
