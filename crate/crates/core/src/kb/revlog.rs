//! Append-only, content-addressed revision chain.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub id: String,
    pub parent: Option<String>,
    pub author: String,
    /// Milliseconds since the Unix epoch.
    pub timestamp: i64,
    pub message: String,
    /// Canonical JSON of the changes in this revision.
    pub changeset: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Revision id: SHA-256 over the length-prefixed parent id, author,
/// timestamp, message and the SHA-256 of the change set.
pub fn revision_id(parent: Option<&str>, author: &str, timestamp: i64, message: &str, changeset: &str) -> String {
    let mut h = Sha256::new();
    let ts = timestamp.to_string();
    let cs = sha256_hex(changeset.as_bytes());
    for field in [parent.unwrap_or(""), author, ts.as_str(), message, cs.as_str()] {
        h.update((field.len() as u64).to_be_bytes());
        h.update(field.as_bytes());
    }
    hex::encode(h.finalize())
}

impl Revision {
    pub fn new(parent: Option<String>, author: &str, timestamp: i64, message: &str, changeset: String) -> Revision {
        Revision {
            id: revision_id(parent.as_deref(), author, timestamp, message, &changeset),
            parent,
            author: author.to_string(),
            timestamp,
            message: message.to_string(),
            changeset,
        }
    }

    /// Whether the stored id matches the contents.
    pub fn verifies(&self) -> bool {
        self.id == revision_id(self.parent.as_deref(), &self.author, self.timestamp, &self.message, &self.changeset)
    }
}

/// Checks every id and parent link. On failure returns the index of the
/// first bad revision.
pub fn verify_chain(history: &[Revision]) -> Result<(), usize> {
    let mut parent: Option<&str> = None;
    for (i, r) in history.iter().enumerate() {
        if r.parent.as_deref() != parent || !r.verifies() {
            return Err(i);
        }
        parent = Some(&r.id);
    }
    Ok(())
}

pub fn verify(history: &[Revision]) -> bool {
    verify_chain(history).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Vec<Revision> {
        let a = Revision::new(None, "ann", 1, "one", "[1]".into());
        let b = Revision::new(Some(a.id.clone()), "ann", 2, "two", "[2]".into());
        vec![a, b]
    }

    #[test]
    fn chain_verifies() {
        assert!(verify(&chain()));
        assert!(verify(&[]));
    }

    #[test]
    fn tampering_is_detected() {
        let mut h = chain();
        h[0].changeset = "[3]".into();
        assert_eq!(verify_chain(&h), Err(0));
        let mut h = chain();
        h[1].message = "TWO".into();
        assert_eq!(verify_chain(&h), Err(1));
        let mut h = chain();
        h.swap(0, 1);
        assert!(!verify(&h));
    }

    #[test]
    fn id_is_hex_sha256() {
        let r = &chain()[0];
        assert_eq!(r.id.len(), 64);
        assert!(r.id.chars().all(|c| c.is_ascii_hexdigit()));
    }
}
