#!/usr/bin/env python3
"""
Database initialization script for the experiment store.

Usage:
    python scripts/init_db.py [--drop-all] [--info]

Options:
    --drop-all    Drop the experiment tables before creating them again
    --info        Show database information and exit
"""

import asyncio
import argparse
import sys
from pathlib import Path

# Add the parent directory to the Python path so we can import app modules
sys.path.insert(0, str(Path(__file__).parent.parent))

from sqlalchemy import inspect

from app.config import DATABASE_URL
from app.database import engine, Base, close_db
from app.models import ExperimentRun, SweepRowRecord

EXPECTED_TABLES = [ExperimentRun.__tablename__, SweepRowRecord.__tablename__]


async def drop_all_tables():
    """Drop the experiment tables. Stored runs are lost."""
    print("Dropping experiment tables...")
    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.drop_all)
    print("All tables dropped")


async def create_all_tables():
    """Create experiment_runs and sweep_rows if they do not exist."""
    print("Creating database tables...")
    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)
    print("Database tables created")


async def existing_tables():
    """Names of the tables present in the database."""
    async with engine.begin() as conn:
        return await conn.run_sync(lambda sync_conn: inspect(sync_conn).get_table_names())


async def verify_database_schema() -> bool:
    """Check that every experiment table exists."""
    tables = await existing_tables()
    print(f"Found tables: {', '.join(tables) or 'none'}")
    missing = [table for table in EXPECTED_TABLES if table not in tables]
    if missing:
        print(f"Missing tables: {', '.join(missing)}")
        return False
    print("All required tables are present")
    return True


async def show_database_info():
    """Display the configured database and its tables."""
    print(f"Database URL: {DATABASE_URL}")
    print(f"Engine: {engine.url}")
    try:
        tables = await existing_tables()
        print(f"Tables: {len(tables)} found")
        for table in tables:
            print(f"  - {table}")
    except Exception as e:
        print(f"Status: Database not accessible ({e})")


async def main():
    """Handle database initialization based on command line arguments."""
    parser = argparse.ArgumentParser(description="Initialize the experiment store")
    parser.add_argument(
        "--drop-all",
        action="store_true",
        help="Drop the experiment tables before creating them (destroys stored runs)"
    )
    parser.add_argument("--info", action="store_true", help="Show database information and exit")
    args = parser.parse_args()

    try:
        if args.info:
            await show_database_info()
            return

        if args.drop_all:
            confirmation = input("This will delete every stored run. Type 'yes' to continue: ")
            if confirmation.lower() != "yes":
                print("Operation cancelled")
                return
            await drop_all_tables()

        await create_all_tables()
        if not await verify_database_schema():
            sys.exit(1)
    finally:
        await close_db()


if __name__ == "__main__":
    asyncio.run(main())
