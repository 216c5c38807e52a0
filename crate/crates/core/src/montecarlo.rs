//! Seeded Glauber dynamics (in progress).
