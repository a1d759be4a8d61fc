from app.services.z2_service import (
    Z2SparseMatrix,
    boundary_matrix,
    coboundary_matrix,
    lazy_reduce,
    reduce_column,
    swap_columns,
    verify_decomposition,
)


def assert_same_reduction(triple, expected):
    assert triple.R == expected.R
    assert triple.U == expected.U
    assert triple.V == expected.V
    assert triple.pivots == expected.pivots
    assert triple.lows == expected.lows


def test_boundary_matrix_follows_the_filter(hollow_triangle):
    X, h = hollow_triangle
    D = boundary_matrix(X, h, 1)
    assert D.row_order == ("a", "b", "c")
    assert D.col_order == ("ab", "bc", "ca")
    assert D.column("ca") == {"a", "c"}
    assert D.low("ab") == "b"


def test_coboundary_matrix_reverses_the_filter(hollow_triangle):
    X, h = hollow_triangle
    D = coboundary_matrix(X, h, 0)
    assert D.row_order == ("ca", "bc", "ab")
    assert D.col_order == ("c", "b", "a")
    assert D.column("a") == {"ab", "ca"}


def test_antitranspose_of_boundary_is_coboundary(hollow_triangle):
    X, h = hollow_triangle
    assert boundary_matrix(X, h, 1).antitranspose() == coboundary_matrix(X, h, 0)


def test_lazy_reduction_of_hollow_triangle(hollow_triangle):
    X, h = hollow_triangle
    D = boundary_matrix(X, h, 1)
    triple = lazy_reduce(D)
    assert triple.pivots == {"b": "ab", "c": "bc"}
    assert triple.R.is_zero_column("ca")
    assert triple.U.entries() == {("ab", "ab"), ("bc", "bc"), ("ca", "ca"), ("ab", "ca"), ("bc", "ca")}
    assert triple.V.column("ca") == {"ab", "bc", "ca"}
    assert verify_decomposition(D, triple)
    assert (triple.D @ triple.V) == triple.R


def test_dual_reduction_of_hollow_triangle(hollow_triangle):
    X, h = hollow_triangle
    triple = lazy_reduce(coboundary_matrix(X, h, 0))
    assert triple.pivots == {"bc": "c", "ab": "b"}
    assert triple.U.row("b") == {"b", "a"}
    assert triple.U.row("c") == {"c", "a"}


def test_row_and_column_additions_stay_in_sync():
    M = Z2SparseMatrix(["r1", "r2"], ["c1", "c2"], {"c1": ["r1"], "c2": ["r1", "r2"]})
    M.add_column("c2", "c1")
    assert M.column("c2") == {"r2"}
    assert M.row("r1") == {"c1"}
    M.add_row("r1", "r2")
    assert M.entries() == {("r1", "c1"), ("r1", "c2"), ("r2", "c2")}


def test_swaps_change_orders_not_entries():
    M = Z2SparseMatrix(["r1", "r2"], ["c1", "c2"], {"c1": ["r1"], "c2": ["r2"]})
    M.swap_rows("r1", "r2")
    M.swap_cols("c1", "c2")
    assert M.row_order == ("r2", "r1")
    assert M.col_order == ("c2", "c1")
    assert M.get("r1", "c1") == 1
    assert M.low("c1") == "r1"


def test_remove_row_and_column():
    M = Z2SparseMatrix.identity(["x", "y", "z"])
    M.toggle("x", "z")
    M.remove_row("y")
    M.remove_col("y")
    assert M.shape == (2, 2)
    assert M.is_upper_unitriangular()
    assert M.column("z") == {"x", "z"}


def test_unitriangular_check():
    M = Z2SparseMatrix.identity(["x", "y"])
    M.toggle("y", "x")
    assert not M.is_upper_unitriangular()


def test_swapping_related_columns_reduces_the_later_chains_again():
    # q and z both add p; after the swap z only adds q
    D = Z2SparseMatrix(
        ["r1", "r2", "r3"],
        ["p", "q", "z"],
        {"p": ["r1", "r3"], "q": ["r2", "r3"], "z": ["r1", "r2", "r3"]},
    )
    triple = lazy_reduce(D)
    assert triple.U.get("p", "q") and triple.U.get("p", "z") and triple.U.get("q", "z")
    assert swap_columns(triple, "p", "q") == ["q", "p", "z"]
    assert triple.D.col_order == ("q", "p", "z")
    assert triple.pivots == {"r3": "q", "r2": "p", "r1": "z"}
    assert triple.U.column("z") == {"q", "z"}
    assert_same_reduction(triple, lazy_reduce(triple.D))
    assert verify_decomposition(triple.D, triple)


def test_swapping_unrelated_columns_only_moves_them():
    D = Z2SparseMatrix(["r1", "r2"], ["p", "q"], {"p": ["r1"], "q": ["r2"]})
    triple = lazy_reduce(D)
    assert swap_columns(triple, "p", "q") == []
    assert triple.D.col_order == triple.U.col_order == ("q", "p")
    assert_same_reduction(triple, lazy_reduce(triple.D))


def test_reduce_column_only_looks_at_earlier_columns():
    D = Z2SparseMatrix(["r1", "r2"], ["x", "y"], {"x": ["r1", "r2"], "y": ["r2"]})
    triple = lazy_reduce(D)
    assert triple.pivots == {"r2": "x", "r1": "y"}
    assert not reduce_column(triple, "x")
    assert not reduce_column(triple, "y")
    assert_same_reduction(triple, lazy_reduce(D))
