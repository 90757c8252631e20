"""
Database module for benchmark runs.
Handles SQLite tracking of scenario runs and their per-replicate records.
"""

import json
import sqlite3
from contextlib import contextmanager
from pathlib import Path
from typing import Generator, Iterable, List, Optional

from experiments import ReplicateRecord


class ResultStore:
    """SQLite store for benchmark runs."""

    def __init__(self, db_path: Path = Path("./results.db")):
        self.db_path = Path(db_path)
        self._init_db()

    def _init_db(self) -> None:
        """Initialize the database schema."""
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        with self._get_connection() as conn:
            conn.execute(
                """
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    scenario TEXT NOT NULL,
                    seed INTEGER NOT NULL,
                    reps INTEGER NOT NULL,
                    status TEXT DEFAULT 'running',
                    out_dir TEXT,
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
                    completed_at TIMESTAMP,
                    error_message TEXT
                )
                """
            )
            conn.execute(
                """
                CREATE TABLE IF NOT EXISTS replicates (
                    run_id INTEGER NOT NULL REFERENCES runs(id),
                    rep INTEGER NOT NULL,
                    variant TEXT NOT NULL,
                    alpha REAL NOT NULL,
                    status TEXT NOT NULL,
                    k_hat INTEGER,
                    breaks TEXT,
                    mse REAL,
                    mae REAL,
                    cp_distance REAL,
                    sigma REAL,
                    q REAL,
                    error_message TEXT,
                    PRIMARY KEY (run_id, rep, variant, alpha)
                )
                """
            )
            # Create indexes for faster queries
            conn.execute(
                "CREATE INDEX IF NOT EXISTS idx_runs_scenario ON runs(scenario)"
            )
            conn.commit()

    @contextmanager
    def _get_connection(self) -> Generator[sqlite3.Connection, None, None]:
        """Get a database connection with row factory."""
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        try:
            yield conn
            conn.commit()
        except Exception:
            conn.rollback()
            raise
        finally:
            conn.close()

    # Run Management

    def create_run(
        self,
        scenario: str,
        seed: int,
        reps: int,
        out_dir: Optional[str] = None,
    ) -> int:
        """Create a new run and return its ID."""
        with self._get_connection() as conn:
            cursor = conn.execute(
                """
                INSERT INTO runs (scenario, seed, reps, status, out_dir)
                VALUES (?, ?, ?, 'running', ?)
                """,
                (scenario, seed, reps, out_dir),
            )
            return cursor.lastrowid

    def get_run(self, run_id: int) -> Optional[dict]:
        """Get run details by ID."""
        with self._get_connection() as conn:
            row = conn.execute(
                "SELECT * FROM runs WHERE id = ?", (run_id,)
            ).fetchone()
            return dict(row) if row else None

    def get_recent_runs(self, limit: int = 10) -> List[dict]:
        """Get the most recent runs, newest first."""
        with self._get_connection() as conn:
            rows = conn.execute(
                """
                SELECT * FROM runs
                ORDER BY id DESC
                LIMIT ?
                """,
                (limit,),
            ).fetchall()
            return [dict(row) for row in rows]

    def update_run_status(
        self,
        run_id: int,
        status: str,
        error_message: Optional[str] = None,
    ) -> None:
        """Update run status."""
        with self._get_connection() as conn:
            if status == "completed":
                conn.execute(
                    """
                    UPDATE runs
                    SET status = ?,
                        completed_at = CURRENT_TIMESTAMP,
                        error_message = ?
                    WHERE id = ?
                    """,
                    (status, error_message, run_id),
                )
            else:
                conn.execute(
                    "UPDATE runs SET status = ?, error_message = ? WHERE id = ?",
                    (status, error_message, run_id),
                )

    # Replicate Records

    def record_replicates(
        self, run_id: int, records: Iterable[ReplicateRecord]
    ) -> int:
        """Store replicate records of a run; returns the number written."""
        rows = [
            (
                run_id,
                r.rep,
                r.variant,
                r.alpha,
                r.status.value,
                r.k_hat,
                json.dumps(list(r.breaks)),
                r.mse,
                r.mae,
                r.cp_distance,
                r.sigma,
                r.q,
                r.error_message,
            )
            for r in records
        ]
        with self._get_connection() as conn:
            conn.executemany(
                """
                INSERT OR REPLACE INTO replicates
                (run_id, rep, variant, alpha, status, k_hat, breaks,
                 mse, mae, cp_distance, sigma, q, error_message)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
                """,
                rows,
            )
        return len(rows)

    def get_run_records(self, run_id: int) -> List[dict]:
        """Get all replicate records of a run in replicate order."""
        with self._get_connection() as conn:
            rows = conn.execute(
                """
                SELECT * FROM replicates
                WHERE run_id = ?
                ORDER BY rep, variant, alpha
                """,
                (run_id,),
            ).fetchall()
            records = []
            for row in rows:
                record = dict(row)
                record["breaks"] = json.loads(record["breaks"] or "[]")
                records.append(record)
            return records
