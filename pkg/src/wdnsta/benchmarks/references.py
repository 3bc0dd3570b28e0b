"""Published reference designs for the bundled benchmarks.

Diameters are in inches, costs in dollars and heads in the head unit of the
network file (m for Two-Loop and Hanoi, ft for New York).  Heads are listed
for junction nodes in file order, reservoir first where the source table
includes it.
"""

TWO_LOOP_STA = (18, 10, 16, 4, 16, 10, 10, 1)
TWO_LOOP_STA_HEADS = {"2": 53.24, "3": 30.49, "4": 43.44, "5": 33.78, "6": 30.43, "7": 30.54}

# Split-pipe columns: two diameters per pipe where the source lists segments.
TWO_LOOP_SPLIT = {
    "Alperovits-Shamir": {
        "cost": 497_525,
        "pipes": ((20, 18), (8, 6), (18,), (8, 6), (16,), (12, 10), (6,), (6, 4)),
        "heads": {"2": 53.96, "3": 32.32, "4": 44.97, "5": 32.31, "6": 31.19, "7": 31.57},
    },
    "Goulter": {
        "cost": 435_015,
        "pipes": ((20, 18), (10,), (16,), (6, 4), (16, 14), (12, 10), (10, 8), (2, 1)),
        "heads": {"2": 54.30, "3": 33.19, "4": 44.19, "5": 32.32, "6": 31.19, "7": 31.57},
    },
    "Kessler-Shamir": {
        "cost": 417_500,
        "pipes": ((18,), (12, 10), (16,), (3, 2), (16, 14), (12, 10), (10, 8), (3, 2)),
        "heads": {"2": 53.26, "3": 30.08, "4": 43.64, "5": 30.10, "6": 30.08, "7": 30.09},
    },
}

_H = [str(i) for i in range(1, 33)]


def _heads(values):
    return dict(zip(_H, values))


HANOI = {
    "Savic-Walters": dict(
        omega=None, cost=6.073e6,
        diameters=(40, 40, 40, 40, 40, 40, 40, 40, 40, 30, 24, 24, 20, 16, 12, 12, 16, 20, 20, 40,
                   20, 12, 40, 30, 30, 20, 12, 12, 16, 16, 12, 12, 16, 20),
        heads=_heads((100.00, 97.16, 61.95, 57.21, 51.33, 45.13, 43.68, 41.93, 40.54, 40.34, 38.79,
                      38.78, 34.58, 36.59, 34.71, 32.08, 33.36, 43.32, 55.54, 50.92, 44.79, 39.63,
                      44.83, 39.64, 36.38, 32.67, 31.66, 36.48, 32.04, 31.29, 31.81, 32.17))),
    "Zecchin": dict(
        omega=None, cost=6.134e6,
        diameters=(40, 40, 40, 40, 40, 40, 40, 40, 40, 30, 24, 24, 20, 12, 12, 12, 20, 24, 20, 40,
                   20, 12, 40, 30, 30, 20, 12, 12, 16, 16, 12, 12, 16, 20),
        heads=None),
    "Haghighi": dict(
        omega=None, cost=6.190e6,
        diameters=(40, 40, 40, 40, 40, 40, 40, 40, 30, 30, 30, 24, 16, 12, 12, 16, 20, 24, 24, 40,
                   20, 12, 40, 30, 30, 20, 12, 12, 16, 12, 12, 16, 20, 24),
        heads=_heads((100.00, 97.08, 60.82, 56.38, 50.88, 45.13, 43.81, 42.28, 41.09, 37.61, 36.01,
                      34.83, 30.53, 32.06, 30.96, 31.13, 39.28, 50.04, 57.13, 49.59, 40.04, 34.76,
                      43.42, 37.73, 34.07, 30.51, 30.32, 38.05, 30.08, 30.58, 30.90, 31.81))),
    "STA fixed": dict(
        omega=10.6744, cost=6.097e6,
        diameters=(40, 40, 40, 40, 40, 40, 40, 40, 40, 30, 24, 24, 20, 16, 12, 12, 16, 24, 20, 40,
                   20, 12, 40, 30, 30, 20, 12, 12, 16, 16, 12, 12, 16, 20),
        heads=_heads((100.00, 97.14, 61.64, 56.90, 51.02, 44.82, 43.36, 41.63, 40.25, 39.23, 37.67,
                      34.24, 30.03, 35.61, 33.87, 31.61, 33.56, 49.94, 55.08, 50.53, 41.18, 36.01,
                      44.41, 39.23, 35.98, 32.25, 31.20, 35.76, 31.06, 30.10, 30.58, 31.84))),
    "STA fixed (10.5088)": dict(
        omega=10.5088, cost=6.056e6,
        diameters=(40, 40, 40, 40, 40, 40, 40, 40, 40, 30, 24, 24, 20, 16, 12, 12, 16, 20, 20, 40,
                   20, 12, 40, 30, 30, 20, 12, 12, 16, 12, 12, 16, 16, 24),
        heads=_heads((100.00, 97.17, 61.99, 57.23, 51.31, 45.07, 43.61, 41.85, 40.44, 39.40, 37.85,
                      34.43, 30.24, 35.49, 33.44, 30.36, 30.51, 44.29, 55.90, 50.89, 41.57, 36.42,
                      44.73, 39.03, 35.34, 31.44, 30.15, 39.12, 30.21, 30.47, 30.75, 33.20))),
    "STA variable": dict(
        omega=10.6744, cost=6.109e6,
        diameters=(40, 40, 40, 40, 40, 40, 40, 40, 30, 30, 30, 24, 20, 12, 12, 12, 20, 20, 24, 40,
                   20, 12, 40, 30, 30, 20, 12, 12, 16, 16, 12, 16, 16, 20),
        heads=_heads((100.00, 97.14, 61.64, 57.08, 51.42, 45.49, 44.10, 42.48, 41.20, 37.39, 35.83,
                      34.68, 30.46, 34.64, 30.86, 30.38, 38.00, 44.89, 58.68, 50.43, 41.07, 35.90,
                      44.21, 38.91, 35.56, 31.58, 30.22, 35.60, 30.94, 30.01, 30.13, 31.41))),
    "STA variable (10.5088)": dict(
        omega=10.5088, cost=6.065e6,
        diameters=(40, 40, 40, 40, 40, 40, 40, 40, 30, 30, 30, 24, 20, 16, 12, 12, 16, 24, 20, 40,
                   20, 12, 40, 30, 30, 20, 12, 12, 16, 12, 12, 16, 16, 24),
        heads=_heads((100.00, 97.17, 61.99, 57.34, 51.56, 45.48, 44.06, 42.37, 41.02, 37.01, 35.45,
                      34.30, 30.10, 33.66, 32.17, 30.53, 33.20, 50.16, 55.37, 50.90, 41.59, 36.44,
                      44.76, 39.07, 35.40, 31.53, 30.29, 39.15, 30.26, 30.52, 30.80, 33.26))),
}

_NY_ZERO = (0,) * 21


def _ny(**pipes):
    d = list(_NY_ZERO)
    for k, v in pipes.items():
        d[int(k[1:]) - 1] = v
    return tuple(d)


_NY_HEADS_10_6744 = dict(zip(
    [str(i) for i in range(1, 21)],
    (300.00, 294.20, 286.14, 283.78, 281.68, 280.06, 277.50, 276.65, 273.76, 273.73,
     273.85, 275.12, 278.09, 285.55, 293.32, 260.05, 272.85, 261.15, 255.02, 260.70)))
_NY_HEADS_10_5088 = dict(zip(
    [str(i) for i in range(1, 21)],
    (300.00, 294.33, 286.47, 284.16, 282.13, 280.55, 278.08, 276.51, 273.76, 273.73,
     273.86, 275.15, 278.12, 285.58, 293.34, 260.16, 272.86, 261.30, 255.21, 260.81)))

NEW_YORK = {
    "Gessler": dict(
        omega=None, cost=41.80e6,
        diameters=_ny(p7=100, p8=100, p16=100, p17=100, p18=80, p19=60, p21=80), heads=None),
    "Morgan-Goulter": dict(
        omega=None, cost=39.20e6,
        diameters=_ny(p7=144, p8=144, p16=96, p17=96, p18=84, p19=60, p21=84), heads=None,
        errata={"8": 0}),
    "Dandy": dict(
        omega=None, cost=38.80e6,
        diameters=_ny(p15=120, p16=84, p17=96, p18=84, p19=72, p21=72), heads=None),
    "STA fixed": dict(
        omega=10.6744, cost=38.64e6,
        diameters=_ny(p7=144, p16=96, p17=96, p18=84, p19=72, p21=72), heads=_NY_HEADS_10_6744),
    "STA fixed (10.5088)": dict(
        omega=10.5088, cost=37.13e6,
        diameters=_ny(p7=108, p16=96, p17=96, p18=96, p19=72, p21=72), heads=_NY_HEADS_10_5088,
        errata={"18": 84}),
    "STA variable": dict(
        omega=10.6744, cost=38.64e6,
        diameters=_ny(p7=144, p16=96, p17=96, p18=84, p19=72, p21=72), heads=_NY_HEADS_10_6744),
    "STA variable (10.5088)": dict(
        omega=10.5088, cost=37.13e6,
        diameters=_ny(p7=108, p16=96, p17=96, p18=84, p19=72, p21=72), heads=_NY_HEADS_10_5088),
}
