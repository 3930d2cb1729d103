"""Linear octrees: Morton keys, adaptive refinement, 2:1 balance, interaction lists."""
