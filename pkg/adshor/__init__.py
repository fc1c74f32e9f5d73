"""
Amplitude-damping Shor code workbench.

Exact state-vector simulation, decoding and certification for the
[[(w+1)(w+K), K]] code family and its dual-rail concatenations.
"""
