"""Key rates for reference-frame-independent MDI-QKD with flawed sources."""
