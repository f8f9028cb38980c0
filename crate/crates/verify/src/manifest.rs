//! The static anchor manifest: every identity label the suites must cover.

/// Anchor used by suites that check infrastructure rather than an identity.
pub const PLUMBING: &str = "plumbing";

pub const ANCHORS: &[&str] = &[
    "2.1", "2.1'", "2.2", "2.3", "2.4", "2.5", "2.6", "2.7", "2.8", "2.9", "2.10", "2.11",
    "2.12-1", "2.12", "2.12'", "2.13", "2.14h", "2.15", "2.16", "2.17", "2.18", "2.19", "chi",
    "morf_B", "2.20", "2.21", "2.22", "2.23", "2.24", "2.25", "2.26", "2.27", "2.28", "2.29",
    "2.30", "2.31", "2.32", "2.33", "2.34", "2.35", "2.38", "2.39", "2.40", "2.41", "2.42", "2.43",
    "2.44", "2.45", "2.46", "2.47", "2.48", "2.49", "2.50", "2.b1", "2.b2", "2.b3", "2.b4", "2.b5",
    "3.3", "3.4", "3.5", "3.6", "3.6'", "3.7", "3.8", "3.9", "3.10", "3.11", "3.12", "3.13",
    "3.14", "3.15",
];

pub fn is_known(anchor: &str) -> bool {
    anchor == PLUMBING || ANCHORS.contains(&anchor)
}
