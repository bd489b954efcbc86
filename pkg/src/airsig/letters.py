"""Built-in uppercase letter templates for action-plan generation.

Each template is a short polyline of target points inside a unit box
(x right, y up), drawn as one continuous stream, plus one signed sagitta
fraction per link.  A positive sagitta bows the link to the left of the
travel direction by that fraction of the chord length.
"""

# letter -> (target points, per-link sagitta fractions)
LETTER_TEMPLATES = {
    "A": ([(0.0, 0.0), (0.5, 1.0), (1.0, 0.0), (0.2, 0.45)], [0.0, 0.0, 0.05]),
    "B": ([(0.0, 0.0), (0.0, 1.0), (0.1, 0.55), (0.05, 0.0)], [0.0, -0.45, -0.5]),
    "C": ([(0.85, 0.85), (0.12, 0.5), (0.85, 0.12)], [0.3, 0.3]),
    "D": ([(0.0, 0.0), (0.0, 1.0), (0.05, 0.0)], [0.0, -0.55]),
    "E": ([(0.85, 0.95), (0.05, 1.0), (0.05, 0.5), (0.65, 0.5), (0.05, 0.45), (0.85, 0.0)], [0.0, 0.0, 0.0, 0.0, 0.0]),
    "F": ([(0.85, 1.0), (0.05, 1.0), (0.05, 0.55), (0.6, 0.55), (0.05, 0.5), (0.05, 0.0)], [0.0, 0.0, 0.0, 0.0, 0.0]),
    "G": ([(0.85, 0.8), (0.12, 0.5), (0.8, 0.12), (0.85, 0.5), (0.45, 0.5)], [0.3, 0.3, 0.1, 0.0]),
    "H": ([(0.0, 1.0), (0.0, 0.0), (0.05, 0.5), (0.95, 0.5), (1.0, 1.0), (1.0, 0.0)], [0.0, 0.0, 0.0, 0.0, 0.0]),
    "I": ([(0.35, 1.0), (0.5, 1.0), (0.5, 0.0), (0.65, 0.0)], [0.0, 0.0, 0.0]),
    "J": ([(0.7, 1.0), (0.7, 0.3), (0.35, 0.05), (0.15, 0.3)], [0.0, -0.25, -0.25]),
    "K": ([(0.0, 1.0), (0.0, 0.0), (0.05, 0.45), (0.85, 0.95), (0.1, 0.4), (0.9, 0.0)], [0.0, 0.0, 0.0, 0.0, 0.0]),
    "L": ([(0.0, 1.0), (0.0, 0.0), (0.8, 0.0)], [0.0, 0.0]),
    "M": ([(0.0, 0.0), (0.05, 1.0), (0.5, 0.35), (0.95, 1.0), (1.0, 0.0)], [0.0, 0.0, 0.0, 0.0]),
    "N": ([(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)], [0.0, 0.0, 0.0]),
    "O": ([(0.5, 1.0), (0.5, 0.0), (0.52, 0.97)], [0.5, 0.5]),
    "P": ([(0.0, 0.0), (0.0, 1.0), (0.05, 0.45)], [0.0, -0.45]),
    "Q": ([(0.5, 1.0), (0.45, 0.02), (0.5, 0.97), (0.6, 0.35), (1.0, -0.05)], [0.5, 0.5, 0.0, 0.0]),
    "R": ([(0.0, 0.0), (0.0, 1.0), (0.08, 0.5), (0.9, 0.0)], [0.0, -0.45, 0.05]),
    "S": ([(0.85, 0.88), (0.2, 0.62), (0.8, 0.35), (0.18, 0.08)], [0.35, -0.3, 0.35]),
    "T": ([(0.0, 1.0), (1.0, 1.0), (0.5, 1.0), (0.5, 0.0)], [0.0, 0.0, 0.0]),
    "U": ([(0.0, 1.0), (0.1, 0.15), (0.9, 0.15), (1.0, 1.0)], [0.0, 0.35, 0.0]),
    "V": ([(0.0, 1.0), (0.5, 0.0), (1.0, 1.0)], [0.0, 0.0]),
    "W": ([(0.0, 1.0), (0.25, 0.0), (0.5, 0.6), (0.75, 0.0), (1.0, 1.0)], [0.0, 0.0, 0.0, 0.0]),
    "X": ([(1.0, 1.0), (0.0, 0.0), (0.5, 0.5), (0.0, 1.0), (1.0, 0.0)], [0.0, 0.0, 0.0, 0.0]),
    "Y": ([(0.0, 1.0), (0.5, 0.5), (1.0, 1.0), (0.5, 0.52), (0.5, 0.0)], [0.0, 0.0, 0.0, 0.0]),
    "Z": ([(0.0, 1.0), (1.0, 1.0), (0.0, 0.0), (1.0, 0.0)], [0.0, 0.0, 0.0]),
}

ALPHABET = "".join(sorted(LETTER_TEMPLATES))
