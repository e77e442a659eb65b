"""
haupt - Exact q-series toolkit for monstrous moonshine Hauptmoduln

Computes q-expansions of Hauptmoduln and checks their p-adic behaviour
under the U_p operator with exact rational arithmetic.

Features:
- Truncated Laurent series with explicit precision windows
- Eta quotients, Eisenstein series, J and Atkin-Lehner slash actions
- Group-symbol algebra for n|h-type groups and a Hauptmodul catalog
- Valuation sequences, congruence / compression / functional-equation checks
- Moonshine-module checks for finite groups via Schur orthogonality
- Command-line front end with JSON / TSV reports
"""

__version__ = "0.1.0"
__author__ = "Avi Cohen"
