//! Peierls contour machinery (in progress).
