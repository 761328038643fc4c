//! The preloaded relation library, shipped as embedded source in the
//! engine's surface syntax so every use also exercises the parser.

use crate::db::Database;

pub const STDLIB_SOURCE: &str = include_str!("reif_stdlib.pl");

/// A database with the relation library loaded.
pub fn stdlib() -> Database {
    let mut db = Database::new();
    db.load_str(STDLIB_SOURCE)
        .expect("embedded library must load");
    db
}
