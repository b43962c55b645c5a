"""Rate regions of the discrete memoryless Z channel."""
