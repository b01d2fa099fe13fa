"""Type systems: simple and ML inference, System F, subtyping, IR typing."""
