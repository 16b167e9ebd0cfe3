"""
Choosing the block size
=======================

If estimating on a block of ``l`` points costs ``O(l^a)`` and fusing ``m``
estimates costs ``O(m^b)``, the total is balanced by
``l = n^((b - 1) / (a + b - 1))``.
"""

from rfm import plan_split

n = 1_000_000
for a, b in [(1, 2), (2, 2), (2, 3), (1, 4)]:
    plan = plan_split(n, a, b)
    print(f"a={a} b={b}:  l={plan.l:7d}  m={plan.m:7d}")
