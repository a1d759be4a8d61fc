"""
Session Store
=============

Description: Bounded in-memory store of engine sessions
Version: 1.0.0

Every session holds one MorseState. Changes go through session_transaction,
which hands out a working copy and stores it back only when the block
completes without errors.
"""

import logging
import threading
import uuid
from contextlib import contextmanager
from typing import Iterator

from app.config import SESSION_STORE_SIZE
from app.exceptions import SessionNotFoundError, StoreExhaustedError
from app.services.morse_state import MorseState

logger = logging.getLogger(__name__)


class SessionStore:
    def __init__(self, max_sessions: int = SESSION_STORE_SIZE):
        self.max_sessions = max_sessions
        self._sessions: dict[str, MorseState] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)

    def create(self, state: MorseState) -> str:
        """Register a new session and return its id"""
        with self._lock:
            if len(self._sessions) >= self.max_sessions:
                logger.warning(f"Session store is full ({self.max_sessions} sessions)")
                raise StoreExhaustedError(f"Session store exhausted: {self.max_sessions} live sessions")
            session_id = uuid.uuid4().hex
            self._sessions[session_id] = state
            logger.info(f"Created session {session_id}. Live sessions: {len(self._sessions)}")
            return session_id

    def get(self, session_id: str) -> MorseState:
        with self._lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise SessionNotFoundError(f"Session {session_id} not found") from None

    def commit(self, session_id: str, state: MorseState) -> None:
        with self._lock:
            if session_id not in self._sessions:
                raise SessionNotFoundError(f"Session {session_id} not found")
            self._sessions[session_id] = state
            logger.debug(f"Session {session_id} committed")

    def delete(self, session_id: str) -> None:
        with self._lock:
            if self._sessions.pop(session_id, None) is None:
                raise SessionNotFoundError(f"Session {session_id} not found")
            logger.info(f"Deleted session {session_id}. Live sessions: {len(self._sessions)}")

    def clear(self) -> None:
        with self._lock:
            self._sessions.clear()


# Global session store instance
_session_store = None


def get_session_store() -> SessionStore:
    """Get or create the global session store"""
    global _session_store
    if _session_store is None:
        _session_store = SessionStore(SESSION_STORE_SIZE)
        logger.info(f"Session store initialized with {SESSION_STORE_SIZE} max sessions")
    return _session_store


class SessionWork:
    """Working copy handed out by session_transaction; assign `state` to replace it."""

    def __init__(self, session_id: str, state: MorseState):
        self.session_id = session_id
        self.state = state


@contextmanager
def session_transaction(session_id: str, store: SessionStore | None = None) -> Iterator[SessionWork]:
    """Yield a working copy of the session; commit on success, keep the previous snapshot on error"""
    store = store or get_session_store()
    work = SessionWork(session_id, store.get(session_id).copy())
    try:
        yield work
        # Se arriviamo qui senza eccezioni, salva lo stato
        store.commit(session_id, work.state)
    except Exception as e:
        # Errore: lo stato precedente resta in vigore
        logger.warning(f"Session {session_id} rolled back due to error: {e}")
        raise
