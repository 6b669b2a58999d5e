import math
from collections import Counter
from fractions import Fraction

from torus_npoint.matchings import LabelledSet, aut_order, enumerate_fpf, matching_classes, matching_of


def same_series(a, b):
    """Equality of two QSeries below the smaller truncation."""
    lim = min(a.trunc, b.trunc)
    return a.truncate(lim) == b.truncate(lim)


def class_sum_matches_labelled_sum(profile):
    """Each class mu is hit by prod e_k! / |Aut(mu)| labelled matchings."""
    labels = [k for k, e in sorted(profile.items()) for _ in range(e)]
    S = LabelledSet.from_labels(labels)
    hits = Counter(matching_of(inv, S) for inv in enumerate_fpf(S))
    weight = math.prod(math.factorial(e) for e in profile.values())
    classes = matching_classes(profile)
    if set(classes) != set(hits):
        return False
    return all(Fraction(weight, aut_order(m)) == hits[m] for m in classes)
