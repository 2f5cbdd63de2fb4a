//! Placeholder; filled in after the core API settles.
