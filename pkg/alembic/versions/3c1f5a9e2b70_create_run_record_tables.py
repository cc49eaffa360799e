"""Create run record tables

Revision ID: 3c1f5a9e2b70
Revises: 
Create Date: 2026-10-17 12:00:00.000000

"""
from typing import Sequence, Union

from alembic import op
import sqlalchemy as sa


# revision identifiers, used by Alembic.
revision: str = '3c1f5a9e2b70'
down_revision: Union[str, Sequence[str], None] = None
branch_labels: Union[str, Sequence[str], None] = None
depends_on: Union[str, Sequence[str], None] = None


def upgrade() -> None:
    """Upgrade schema."""
    op.create_table('run_records',
    sa.Column('id', sa.Integer(), nullable=False),
    sa.Column('experiment', sa.String(length=32), nullable=False),
    sa.Column('scenario_digest', sa.String(length=64), nullable=False),
    sa.Column('seed', sa.BigInteger(), nullable=False),
    sa.Column('trials', sa.Integer(), nullable=False),
    sa.Column('model_time_s', sa.Float(), nullable=True),
    sa.Column('wall_clock_s', sa.Float(), nullable=True),
    sa.Column('aggregate', sa.JSON(), nullable=False),
    sa.Column('created_at', sa.DateTime(timezone=True), server_default=sa.text('(CURRENT_TIMESTAMP)'), nullable=True),
    sa.CheckConstraint('trials >= 1', name='check_trials_positive'),
    sa.PrimaryKeyConstraint('id')
    )
    op.create_index('idx_run_records_digest', 'run_records', ['scenario_digest'], unique=False)
    op.create_index('idx_run_records_experiment', 'run_records', ['experiment'], unique=False)
    op.create_index(op.f('ix_run_records_id'), 'run_records', ['id'], unique=False)
    op.create_table('trial_results',
    sa.Column('id', sa.Integer(), nullable=False),
    sa.Column('run_id', sa.Integer(), nullable=False),
    sa.Column('trial_index', sa.Integer(), nullable=False),
    sa.Column('payload', sa.JSON(), nullable=False),
    sa.ForeignKeyConstraint(['run_id'], ['run_records.id'], ondelete='CASCADE'),
    sa.PrimaryKeyConstraint('id'),
    sa.UniqueConstraint('run_id', 'trial_index', name='unique_run_trial')
    )
    op.create_index('idx_trial_results_run_id', 'trial_results', ['run_id'], unique=False)
    op.create_index(op.f('ix_trial_results_id'), 'trial_results', ['id'], unique=False)


def downgrade() -> None:
    """Downgrade schema."""
    op.drop_index(op.f('ix_trial_results_id'), table_name='trial_results')
    op.drop_index('idx_trial_results_run_id', table_name='trial_results')
    op.drop_table('trial_results')
    op.drop_index(op.f('ix_run_records_id'), table_name='run_records')
    op.drop_index('idx_run_records_experiment', table_name='run_records')
    op.drop_index('idx_run_records_digest', table_name='run_records')
    op.drop_table('run_records')
