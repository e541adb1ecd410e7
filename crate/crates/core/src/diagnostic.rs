use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A validation finding. `code` is a stable upper-case tag such as
/// `FLOW_GRAMMAR`; `location` names the offending element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diagnostic {
    pub location: String,
    pub code: &'static str,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: &'static str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { location: location.into(), code, severity: Severity::Error, message: message.into() }
    }

    pub fn warning(code: &'static str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { location: location.into(), code, severity: Severity::Warning, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}] {}: {}", self.severity, self.code, self.location, self.message)
    }
}

/// Sorts by location, then code, then message.
pub fn sort(diags: &mut Vec<Diagnostic>) {
    diags.sort_by(|a, b| (&a.location, a.code, &a.message).cmp(&(&b.location, b.code, &b.message)));
    diags.dedup();
}

/// Stable diagnostic codes.
pub mod codes {
    pub const BAD_NAME: &str = "BAD_NAME";
    pub const DUPLICATE_MACHINE: &str = "DUPLICATE_MACHINE";
    pub const BAD_OWNER: &str = "BAD_OWNER";
    pub const DANGLING_PATH: &str = "DANGLING_PATH";
    pub const FLOW_GRAMMAR: &str = "FLOW_GRAMMAR";
    pub const CROSS_MACHINE_FLOW: &str = "CROSS_MACHINE_FLOW";
    pub const MIXED_ENDPOINTS: &str = "MIXED_ENDPOINTS";
    pub const SELF_LOOP: &str = "SELF_LOOP";
    pub const DUPLICATE_FLOW: &str = "DUPLICATE_FLOW";
    pub const DUPLICATE_TRIGGER: &str = "DUPLICATE_TRIGGER";

    pub const DUPLICATE_EVENT: &str = "DUPLICATE_EVENT";
    pub const EMPTY_REGION: &str = "EMPTY_REGION";
    pub const UNKNOWN_PATH: &str = "UNKNOWN_PATH";
    pub const DISCONNECTED_REGION: &str = "DISCONNECTED_REGION";
    pub const BAD_EVENT_KIND: &str = "BAD_EVENT_KIND";
    pub const UNKNOWN_EVENT: &str = "UNKNOWN_EVENT";
    pub const CHRONO_CYCLE: &str = "CHRONO_CYCLE";
    pub const DUPLICATE_PROGRAM: &str = "DUPLICATE_PROGRAM";
    pub const BAD_COND: &str = "BAD_COND";
}
