import pytest

from app.exceptions import IneligiblePairError, SessionNotFoundError, StoreExhaustedError
from app.services.simplification_service import cancel_pair
from app.store import SessionStore, session_transaction


def test_create_get_delete(triangle_state):
    store = SessionStore(max_sessions=2)
    session_id = store.create(triangle_state)
    assert len(session_id) == 32
    assert store.get(session_id) is triangle_state
    store.delete(session_id)
    assert len(store) == 0
    with pytest.raises(SessionNotFoundError):
        store.get(session_id)
    with pytest.raises(SessionNotFoundError):
        store.delete(session_id)


def test_store_is_bounded(triangle_state):
    store = SessionStore(max_sessions=1)
    store.create(triangle_state)
    with pytest.raises(StoreExhaustedError):
        store.create(triangle_state)


def test_transaction_commits(triangle_state):
    store = SessionStore()
    session_id = store.create(triangle_state)
    with session_transaction(session_id, store) as work:
        work.state, _ = cancel_pair(work.state, work.state.pair_of("ab"))
    assert store.get(session_id).criticals == {"a", "c", "bc", "ca"}


def test_transaction_rolls_back(triangle_state):
    store = SessionStore()
    session_id = store.create(triangle_state)
    with pytest.raises(IneligiblePairError):
        with session_transaction(session_id, store) as work:
            work.state.dmf = None
            cancel_pair(triangle_state, triangle_state.pair_of("a"))
    assert store.get(session_id) is triangle_state
    assert store.get(session_id).dmf is not None
