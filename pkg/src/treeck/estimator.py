"""Estimator-style front end: fit a lattice action, transform letter vectors into K0."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .alphabet import build_alphabet, build_decoration, build_transition, count_orbits
from .exceptions import BoundError, ConsistencyError, HypothesisError
from .ktheory import (PointedGroup, bowen_franks, classify, identity_class,
                      pointed_isomorphic)
from .sft import check_h2, check_h3, count_words
from .tree import TreeModel, as_edge, as_star, ball_cap, build_model, validate_hypotheses
from .validation import check_letter_vectors


def _model_for(X, tree_model):
    if isinstance(X, TreeModel):
        if tree_model is not None and tree_model != X.geometry:
            raise ValueError(f"model geometry is {X.geometry!r}, not {tree_model!r}")
        return X
    if tree_model == "star":
        X = as_star(X)
    elif tree_model == "edge":
        X = as_edge(X)
    elif tree_model is not None:
        raise ValueError(f"tree_model must be 'edge', 'star' or None, got {tree_model!r}")
    return build_model(X)


def orbit_word_table(model, M, k: int, max_m: int) -> list:
    """Compare orbit counts of segments of length ``m + k + 1`` with word counts of ``M``.

    Rows whose segment length exceeds the ball cap are marked skipped.
    """
    rows = []
    for m in range(max_m + 1):
        length = m + k + 1
        words = count_words(M, m)
        if length > ball_cap():
            rows.append({"m": m, "orbits": None, "words": words, "holds": None,
                         "skipped": f"length {length} exceeds ball cap"})
            continue
        orbits = count_orbits(model, length)
        rows.append({"m": m, "orbits": orbits, "words": words, "holds": orbits == words})
    return rows


class BoundaryKTheory(TransformerMixin, BaseEstimator):
    """Pointed K-theory of the boundary algebra of a tree lattice.

    Parameters
    ----------
    k : int or None
        Segment length parameter; ``None`` uses the acylindricity constant.
    tree_model : {"edge", "star"} or None
        Geometry used for free products; ``None`` keeps the action's own.
    max_l1_check : int
        Largest ``m`` for which orbit and word counts are compared.
    verify_oracle : bool
        Cross-check identity classes with the lattice oracle and raise
        :class:`ConsistencyError` on disagreement.

    Attributes
    ----------
    model_ : TreeModel
    alphabet_ : Alphabet
    transition_matrix_ : TransitionMatrix
    bowen_franks_ : BowenFranks
    k0_ : AbelianGroup
    k1_rank_ : int
    decorations_ : list of Decoration
        One per fundamental vertex.
    identity_class_ : IdentityClass
        Unit class for the first fundamental vertex.
    unit_classes_ : list of PointedGroup
    classification_ : ClassificationLabel
    orbit_words_ : list of dict
    """

    def __init__(self, k=None, tree_model=None, max_l1_check=3, verify_oracle=True):
        self.k = k
        self.tree_model = tree_model
        self.max_l1_check = max_l1_check
        self.verify_oracle = verify_oracle

    def fit(self, X, y=None):
        """Run the pipeline on a lattice action (or an already built :class:`TreeModel`)."""
        model = _model_for(X, self.tree_model)
        hyp = validate_hypotheses(model)
        if not hyp.passed:
            first = hyp.failures[0]
            raise HypothesisError(first.get("detail", first["reason"]), reasons=hyp.reasons())
        alphabet = build_alphabet(model, self.k)
        M = build_transition(model, alphabet)
        h2 = check_h2(M)
        if not h2:
            raise HypothesisError(f"transition matrix is not irreducible: no word from "
                                  f"{h2.witness[0]} to {h2.witness[1]}", reasons=["not_h2"],
                                  witness=h2.witness)
        h3 = check_h3(M)
        if not h3:
            raise HypothesisError(f"transition matrix is periodic: {h3.witness}",
                                  reasons=["not_h3"])
        bf = bowen_franks(M)
        decorations = [build_decoration(model, alphabet, v) for v in model.fundamental_vertices]
        classes = [identity_class(M, d.multiplicities, bf) for d in decorations]
        if self.verify_oracle:
            for c in classes:
                if not c.oracle_agrees:
                    raise ConsistencyError(f"identity class disagrees with the lattice oracle: "
                                           f"{c.oracle}")

        self.model_ = model
        self.hypotheses_ = hyp
        self.k_ = alphabet.k
        self.alphabet_ = alphabet
        self.transition_matrix_ = M
        self.h2_ = h2
        self.h3_ = h3
        self.bowen_franks_ = bf
        self.k0_ = bf.group
        self.k1_rank_ = bf.k1_rank
        self.decorations_ = decorations
        self.identity_class_ = classes[0]
        self.unit_classes_ = [c.unit for c in classes]
        self.classification_ = classify(classes[0].unit, bf.k1_rank)
        self.orbit_words_ = orbit_word_table(model, M, alphabet.k, self.max_l1_check)
        self.n_features_in_ = len(alphabet)
        return self

    def units_agree(self):
        """Whether the unit classes at all fundamental vertices are pointed-isomorphic.

        ``None`` when the comparison is out of range (infinite or large group).
        """
        check_is_fitted(self)
        first = self.unit_classes_[0]
        try:
            return all(pointed_isomorphic(first, u) for u in self.unit_classes_[1:])
        except BoundError:
            return None

    def transform(self, X):
        """Map rows of letter coefficients to their K0 coordinates.

        Returns an ``object`` array so arbitrarily large invariant factors stay exact.
        """
        check_is_fitted(self)
        rows = check_letter_vectors(X, self.n_features_in_)
        out = np.empty((len(rows), self.k0_.ngens), dtype=object)
        for i, r in enumerate(rows):
            out[i, :] = self.bowen_franks_.project(r)
        return out

    def predict(self, X):
        """Cuntz algebra label of ``(K0, class of the row)`` for each row."""
        coords = self.transform(X)
        return np.array([classify(PointedGroup(self.k0_, tuple(c)), self.k1_rank_).pointed
                         for c in coords], dtype=object)

    def summary(self) -> dict:
        check_is_fitted(self)
        return {
            "k": self.k_,
            "alphabet_size": len(self.alphabet_),
            "k0": self.k0_.to_dict(),
            "k1_rank": self.k1_rank_,
            "epsilon": self.identity_class_.epsilon.to_dict(),
            "unit": self.identity_class_.unit.to_dict(),
            "classification": self.classification_.to_dict(),
        }
