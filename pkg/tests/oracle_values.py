"""Frozen reference values computed once with mpmath at 30 digits.

Marginal quantities come from direct quadrature of phi(x - u) gamma(u) over
the real line, independently of the package code:
(family, param, x, log(g/phi), g'/g, g''/g).
"""

MARGINALS = [
    ("lap", 1.0, 0.0, -0.42208311180459074, 0.0, -0.5251352761609812),
    ("lap", 1.0, 0.5, -0.3622762486603006, -0.2589814490349857, -0.4365957447995965),
    ("lap", 1.0, 2.0, 0.6370111554825696, -0.8389110921568544, 0.4711292233359559),
    ("lap", 1.0, 5.0, 8.225781412392507, -0.9999565374899398, 0.9997323368878446),
    ("lap", 1.0, 10.0, 40.72579135264473, -1.0, 1.0),
    ("lap", 3.5, 0.0, -0.0693638066440522, 0.0, -0.879869427001949),
    ("lap", 3.5, 0.5, -0.05427173307100927, -0.43932733570563803, -0.6832002771858804),
    ("lap", 3.5, 2.0, 0.19164676817223963, -1.716743210758626, 2.136419053169078),
    ("lap", 3.5, 5.0, 2.5503934612855095, -3.3890111373630343, 11.29387586333714),
    ("lap", 3.5, 10.0, 22.603554321119603, -3.4999999998623257, 12.24999999813131),
    ("cauchy", 1.0, 0.0, -0.6478744644493182, 0.0, -0.4748647238390188),
    ("cauchy", 1.0, 0.5, -0.5817819239273748, -0.2338238766093014, -0.39850009117098045),
    ("cauchy", 1.0, 2.0, 0.5189081764248222, -0.7178048973064717, 0.38011212539323813),
    ("cauchy", 1.0, 5.0, 9.141986706155095, -0.43684323688333937, 0.29329305535332606),
    ("cauchy", 1.0, 10.0, 45.18944890086022, -0.20416618612326956, 0.06296808359821628),
    ("cauchy", 0.5, 0.0, -1.0900371531220867, 0.0, -0.25356893435431827),
    ("cauchy", 0.5, 0.5, -0.9965017933997985, -0.12493623446559834, -0.22691357691068476),
    ("cauchy", 0.5, 2.0, 0.45844446370600117, -0.3999290867982378, 0.054913281018240216),
    ("cauchy", 0.5, 5.0, 9.689901462403371, -0.3681236392928974, 0.1894429251392752),
    ("cauchy", 0.5, 10.0, 45.85118158633681, -0.19758726523932565, 0.058227594897757265),
    ("quasicauchy", None, 0.0, -0.6931471805599453, 0.0, -0.5),
    ("quasicauchy", None, 0.5, -0.6299962236433105, -0.24479302249907967, -0.4088453537559822),
    ("quasicauchy", None, 2.0, 0.4682921810112503, -0.6869647145006686, 0.40437650075234044),
    ("quasicauchy", None, 5.0, 9.281120448471682, -0.39998136666469963, 0.2398956533223179),
    ("quasicauchy", None, 10.0, 45.394829814011906, -0.2, 0.06),
]
