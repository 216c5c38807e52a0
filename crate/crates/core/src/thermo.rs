//! Entropy and pressure estimates (in progress).
