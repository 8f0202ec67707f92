"""Transcribed closed forms for the complementing-condition computation.

Every entry is a polynomial string in the ASCII syntax accepted by
:func:`macrolab.symkernel.parse`.  Symbols: ``t`` = tau, ``l`` = |Lambda|,
``L1..L3`` = Lambda, ``n1..n3`` = normal, ``x1..x3`` = xi, ``I`` = imaginary unit.

Placeholders in braces are expanded before parsing:

* ``{S}``   -> |xi|^2
* ``{T}``   -> (t - I*l)
* ``{Bjk}`` / ``{Cjk}`` -> the transcribed B_jk / C_jk below (parenthesised)
* ``{Q5}``, ``{Q5b}``, ``{Q5c}`` -> the bracketed n/Lambda combinations

These strings are typed in independently of the code that builds the same
objects from their definitions, so each pipeline step compares two
independent derivations.
"""

S = "(x1**2 + x2**2 + x3**2)"
T = "(t - I*l)"

L_MATRIX = [
    ["-({S} + x1**2)", "-(x1*x2)", "-(x1*x3)"],
    ["-(x1*x2)", "-({S} + x2**2)", "-(x2*x3)"],
    ["-(x1*x3)", "-(x2*x3)", "-({S} + x3**2)"],
]

DET_L = "-2*{S}**3"

ADJOINT_L = [
    ["-({S}**2 + (x2**2 + x3**2)*{S})", "x1*x2*{S}", "x1*x3*{S}"],
    ["x1*x2*{S}", "-({S}**2 + (x1**2 + x3**2)*{S})", "x2*x3*{S}"],
    ["x1*x3*{S}", "x2*x3*{S}", "-({S}**2 + (x1**2 + x2**2)*{S})"],
]

MPLUS = "{T}**3"
MPLUS_EXPANDED = "t**3 - 3*I*l*t**2 - 3*l**2*t + I*l**3"

# det(l(Lambda + tau n)) has the triple root tau = i|Lambda| in the upper half plane
DET_L_SHIFTED = "-2*(t**2 + l**2)**3"

B_SHIFTED = [
    ["t*(1 - n1**2) + L1*n1", "L1*n2 - t*n1*n2", "L1*n3 - t*n1*n3"],
    ["L2*n1 - t*n1*n2", "t*(1 - n2**2) + L2*n2", "L2*n3 - t*n2*n3"],
    ["L3*n1 - t*n1*n3", "L3*n2 - t*n2*n3", "t*(1 - n3**2) + L3*n3"],
    ["n1", "n2", "n3"],
]

FRAK_B = [
    ["t*(1 - n1**2) + L1*n1", "L1*n2 - t*n1*n2", "L1*n3 - t*n1*n3"],
    ["L2*n1 - t*n1*n2", "t*(1 - n2**2) + L2*n2", "L2*n3 - t*n2*n3"],
    ["n1", "n2", "n3"],
]

L_MOD_1 = "-4*l**2*{T}**2"
TAU_L_MOD_1 = "-4*I*l**3*{T}**2"

B_JK = ("(Lj*Lk + 3*I*l*Lj*nk + 3*I*l*Lk*nj - 5*nj*nk*l**2)*t"
        " + I*Lj*Lk*l + nj*Lk*l**2 + Lj*nk*l**2 + 3*I*nj*nk*l**3")
C_JK = ("(3*I*l*Lj*Lk - 5*nj*Lk*l**2 - 5*Lj*nk*l**2 - 7*I*nj*nk*l**3)*t"
        " + Lj*Lk*l**2 + 3*I*l**3*nj*Lk + 3*I*l**3*Lj*nk - 5*nj*nk*l**4")

# L(Lambda + tau n) mod M+ = -(t - I l) * K
K_MATRIX = [
    ["-8*l**2*{T} - {B11}", "-{B12}", "-{B13}"],
    ["-{B12}", "-8*l**2*{T} - {B22}", "-{B23}"],
    ["-{B13}", "-{B23}", "-8*l**2*{T} - {B33}"],
]

# frakB * K mod (t - I l)^2 = M; three successive forms per entry
M_FIRST = [
    ["(1 - n1**2)*(-8*I*l**3*{T} - {C11}) + n1*n2*{C12} + n1*n3*{C13}"
     " - 8*L1*n1*l**2*{T} - L1*n1*{B11} - L1*n2*{B12} - L1*n3*{B13}",
     "-(1 - n1**2)*{C12} + n1*n2*{C22} + n1*n3*{C23} + 8*I*l**3*n1*n2*{T}"
     " - 8*L1*n2*l**2*{T} - L1*n1*{B12} - L1*n2*{B22} - L1*n3*{B23}",
     "-(1 - n1**2)*{C13} + n1*n2*{C23} + n1*n3*{C33} + 8*I*l**3*n1*n3*{T}"
     " - 8*L1*n3*l**2*{T} - n1*L1*{B13} - L1*n2*{B23} - L1*n3*{B33}"],
    ["-(1 - n2**2)*{C12} + n1*n2*{C11} + n2*n3*{C13} + 8*I*l**3*n1*n2*{T}"
     " - 8*L2*n1*l**2*{T} - L2*n1*{B11} - L2*n2*{B12} - L2*n3*{B13}",
     "(1 - n2**2)*(-8*I*l**3*{T} - {C22}) + n1*n2*{C12} + n2*n3*{C23}"
     " - 8*L2*n2*l**2*{T} - L2*n1*{B12} - L2*n2*{B22} - L2*n3*{B23}",
     "-(1 - n2**2)*{C23} + n1*n2*{C13} + n2*n3*{C33} + 8*I*l**3*n2*n3*{T}"
     " - 8*L2*n3*l**2*{T} - L2*n1*{B13} - L2*n2*{B23} - L2*n3*{B33}"],
    ["-8*n1*l**2*{T} - n1*{B11} - n2*{B12} - n3*{B13}",
     "-8*n2*l**2*{T} - n1*{B12} - n2*{B22} - n3*{B23}",
     "-8*n3*l**2*{T} - n1*{B13} - n2*{B23} - n3*{B33}"],
]

M_EXPANDED = [
    ["-8*I*l**3*(1 - n1**2)*{T} + (5*n1*L1*l**2 - 3*I*l*L1**2)*t - L1**2*l**2 - 3*I*n1*L1*l**3"
     " - 8*L1*n1*l**2*{T} - (3*I*l*L1**2 - 5*n1*L1*l**2)*t - L1**2*l**2 - 3*I*n1*L1*l**3",
     "8*I*l**3*n1*n2*{T} + (5*L1*n2*l**2 - 3*I*l*L1*L2)*t - L1*L2*l**2 - 3*I*l**3*n2*L1"
     " - 8*L1*n2*l**2*{T} - (3*I*l*L1*L2 - 5*n2*L1*l**2)*t - L1*L2*l**2 - 3*I*n2*L1*l**3",
     "8*I*l**3*n1*n3*{T} + (5*L1*n3*l**2 - 3*I*l*L1*L3)*t - L1*L3*l**2 - 3*I*l**3*n3*L1"
     " - 8*L1*n3*l**2*{T} - (3*I*l*L1*L3 - 5*n3*L1*l**2)*t - L1*L3*l**2 - 3*I*n3*L1*l**3"],
    ["8*I*l**3*n1*n2*{T} + (5*L2*n1*l**2 - 3*I*l*L1*L2)*t - L1*L2*l**2 - 3*I*l**3*n1*L2"
     " - 8*L2*n1*l**2*{T} - (3*I*l*L1*L2 - 5*n1*L2*l**2)*t - L1*L2*l**2 - 3*I*n1*L2*l**3",
     "-8*I*l**3*(1 - n2**2)*{T} + (5*n2*L2*l**2 - 3*I*l*L2**2)*t - L2**2*l**2 - 3*I*n2*L2*l**3"
     " - 8*L2*n2*l**2*{T} - (3*I*l*L2**2 - 5*n2*L2*l**2)*t - L2**2*l**2 - 3*I*n2*L2*l**3",
     "8*I*l**3*n2*n3*{T} + (5*L2*n3*l**2 - 3*I*l*L3*L2)*t - L3*L2*l**2 - 3*I*l**3*n3*L2"
     " - 8*L2*n3*l**2*{T} - (3*I*l*L3*L2 - 5*n3*L2*l**2)*t - L2*L3*l**2 - 3*I*n3*L2*l**3"],
    ["-8*n1*l**2*{T} - t*(3*I*l*L1 - 5*l**2*n1) - L1*l**2 - 3*I*l**3*n1",
     "-8*n2*l**2*{T} - t*(3*I*l*L2 - 5*l**2*n2) - L2*l**2 - 3*I*l**3*n2",
     "-8*n3*l**2*{T} - t*(3*I*l*L3 - 5*l**2*n3) - L3*l**2 - 3*I*l**3*n3"],
]

M_FINAL = [
    ["-8*I*l**3*(1 - n1**2)*{T} - (6*I*l*L1**2 - 2*n1*L1*l**2)*t - 2*L1**2*l**2 + 2*I*n1*L1*l**3",
     "8*I*l**3*n1*n2*{T} - (6*I*l*L1*L2 - 2*n2*L1*l**2)*t - 2*L1*L2*l**2 + 2*I*l**3*n2*L1",
     "8*I*l**3*n1*n3*{T} - (6*I*l*L1*L3 - 2*n3*L1*l**2)*t - 2*L1*L3*l**2 + 2*I*l**3*n3*L1"],
    ["8*I*l**3*n1*n2*{T} - (6*I*l*L1*L2 - 2*L2*n1*l**2)*t - 2*L1*L2*l**2 + 2*I*n1*L2*l**3",
     "-8*I*l**3*(1 - n2**2)*{T} - (6*I*l*L2**2 - 2*n2*L2*l**2)*t - 2*L2**2*l**2 + 2*I*n2*L2*l**3",
     # corrected form; see M23_AS_PRINTED
     "8*I*l**3*n2*n3*{T} - (6*I*l*L3*L2 - 2*L2*n3*l**2)*t - 2*L2*L3*l**2 + 2*I*n3*L2*l**3"],
    ["-8*n1*l**2*{T} - t*(3*I*l*L1 - 5*l**2*n1) - L1*l**2 - 3*I*l**3*n1",
     "-8*n2*l**2*{T} - t*(3*I*l*L2 - 5*l**2*n2) - L2*l**2 - 3*I*l**3*n2",
     "-8*n3*l**2*{T} - t*(3*I*l*L3 - 5*l**2*n3) - L3*l**2 - 3*I*l**3*n3"],
]

# The last simplified line of the (2,3) entry as it appears in print.  It carries
# -8 L2 n3 l^2 (t - I l) in place of 8 I l^3 n2 n3 (t - I l); the first line of
# the same display and the later determinant bracket use the correct term.
M23_AS_PRINTED = ("-8*L2*n3*l**2*{T} - (6*I*l*L3*L2 - 2*L2*n3*l**2)*t"
                  " - 2*L2*L3*l**2 + 2*I*n3*L2*l**3")
M23_ERRATUM_DELTA = "8*I*l**3*n2*n3*{T} + 8*L2*n3*l**2*{T}"

Q5 = "-n1*n2*L2*L3 - L1*L2*n2*n3 + n2**2*L1*L3 + n1*n3*L2**2 - L1*L3"
Q5B = "-n1**2*L2*L3 - n2*n3*L1**2 + n1*n2*L1*L3 + n1*n3*L1*L2 + L2*L3"
Q5C = "-n1**2*L2**2 - n2**2*L1**2 + 2*n1*n2*L1*L2 + L1**2 + L2**2"

# M12*M23 - M22*M13 with |Lambda| factored out of every entry
DET_FIRST = (
    "l**2*("
    "(8*I*l**2*n1*n2*{T} + (2*L1*n2*l - 6*I*L1*L2)*t - 2*L1*L2*l + 2*I*l**2*n2*L1)"
    "*(8*I*l**2*n2*n3*{T} + (2*L2*n3*l - 6*I*L3*L2)*t - 2*L3*L2*l + 2*I*l**2*n3*L2)"
    " - (-8*I*l**2*(1 - n2**2)*{T} + (2*n2*L2*l - 6*I*L2**2)*t - 2*L2**2*l + 2*I*n2*L2*l**2)"
    "*(8*I*l**2*n1*n3*{T} + (2*L1*n3*l - 6*I*L1*L3)*t - 2*L1*L3*l + 2*I*l**2*n3*L1))"
)

DET_FIRST_CONCLUDED = (
    "l**2*(-64*l**4*n1*n3*{T}**2 + 8*I*l**2*L1*n3*{T}*(2*l*t + 2*I*l**2)"
    " + 8*I*l**2*{T}*({Q5})*(6*I*t + 2*l))"
)

DET_1 = (
    "l**3*(-8*n1*l*{T} - t*(3*I*L1 - 5*l*n1) - L1*l - 3*I*l**2*n1)"
    "*(-64*l**4*n1*n3*{T}**2 + 8*I*l**2*L1*n3*{T}*(2*l*t + 2*I*l**2)"
    " + 8*I*l**2*{T}*({Q5})*(6*I*t + 2*l))"
)
DET_2 = (
    "l**3*(8*n2*l*{T} + t*(3*I*L2 - 5*l*n2) + L2*l + 3*I*l**2*n2)"
    "*(64*l**4*n2*n3*{T}**2 - 8*I*l**2*L2*n3*{T}*(2*l*t + 2*I*l**2)"
    " + 8*I*l**2*{T}*({Q5b})*(6*I*t + 2*l))"
)
DET_3 = (
    "l**3*(-8*n3*l*{T} - t*(3*I*L3 - 5*l*n3) - L3*l - 3*I*l**2*n3)"
    "*(-64*l**4*(1 - n1**2 - n2**2)*{T}**2"
    " - 8*I*l**2*{T}*(n2*L2 + n1*L1)*(2*l*t + 2*I*l**2)"
    " + 8*I*l**2*{T}*({Q5c})*(6*I*t + 2*l))"
)

# successive forms of the final determinant
DET_CHAIN = [
    "l**3*(64*l**5*n3*{T}**2*(8*{T} - 5*t + 3*I*l)"
    " - 8*I*l**5*n3*{T}*(6*I*t + 2*l)*(8*{T} - 5*t + 3*I*l)"
    " - 8*I*l**5*n3*{T}*(2*t + 2*I*l)*(3*t*I + l))",
    "8*l**8*n3*{T}*(8*{T}*(3*t - 5*I*l) + (6*t - 2*I*l)*(3*t - 5*I*l) + (2*t + 2*I*l)*(3*t - I*l))",
    "64*l**8*n3*{T}*({T}*(3*t - 5*I*l) + (3*t - I*l)*{T})",
    "384*l**8*n3*{T}**3",
]

FINAL_DETERMINANT = "384*l**8*n3*{T}**3"

# grouped cancellations: (name, left side, right side)
CANCELLATIONS = [
    ("(1)x(4)", "n1*n2*n2*n3 + (1 - n2**2)*n1*n3", "n1*n3"),
    ("(2)x(5)", "L1*n2*L2*n3 - n2*L2*L1*n3", "0"),
    ("(3)x(6)", "L1*L2*L3*L2 - L2**2*L1*L3", "0"),
    ("(2)x(6)+(3)x(5)", "-L1*n2*L3*L2 - L2*n3*L1*L2 + n2*L2*L1*L3 + L1*n3*L2**2", "0"),
    ("(1)x(5)+(2)x(4)", "n1*n2*L2*n3 + L1*n2*n2*n3 + (1 - n2**2)*L1*n3 - n1*n3*n2*L2", "L1*n3"),
    ("(1)x(6)+(3)x(4)", "-n1*n2*L3*L2 - L1*L2*n2*n3 - (1 - n2**2)*L1*L3 + n1*n3*L2**2", "{Q5}"),
    ("[1]x[3]", "n1*n1*n3 + n2*n2*n3 + n3*(1 - n1**2 - n2**2)", "n3"),
    ("[1]x[4]", "-n1*L1*n3 - n2*L2*n3 + n3*(n2*L2 + n1*L1)", "0"),
    ("[1]x[5]",
     "n1**2*n2*L2*L3 + n1*n2*n3*L1*L2 - n1*n2**2*L1*L3 - n1**2*n3*L2**2 + n1*L1*L3"
     " - n1**2*n2*L2*L3 - n2**2*n3*L1**2 + n1*n2**2*L1*L3 + n1*n2*n3*L1*L2 + n2*L2*L3"
     " + n1**2*n3*L2**2 + n2**2*n3*L1**2 - 2*n1*n2*n3*L1*L2 - n3*L1**2 - n3*L2**2",
     "-n3*l**2"),
    ("[2]x[3]", "n1*n3*L1 + n2*n3*L2 + (1 - n1**2 - n2**2)*L3", "0"),
    ("[2]x[4]", "-L1**2*n3 - L2**2*n3 + L3*(n2*L2 + n1*L1)", "-n3*l**2"),
    ("[2]x[5]",
     "n1*n2*L1*L2*L3 + n2*n3*L1**2*L2 - n2**2*L1**2*L3 - n1*n3*L1*L2**2 + L1**2*L3"
     " - n1**2*L2**2*L3 - n2*n3*L1**2*L2 + n1*n2*L1*L2*L3 + n1*n3*L1*L2**2 + L2**2*L3"
     " + n1**2*L2**2*L3 + n2**2*L1**2*L3 - 2*n1*n2*L1*L2*L3 - L1**2*L3 - L2**2*L3",
     "0"),
]
