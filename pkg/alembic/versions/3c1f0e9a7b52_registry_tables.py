"""registry tables

Revision ID: 3c1f0e9a7b52
Revises:
Create Date: 2026-10-17 10:12:31.204518

"""
from alembic import op
import sqlalchemy as sa


# revision identifiers, used by Alembic.
revision = '3c1f0e9a7b52'
down_revision = None
branch_labels = None
depends_on = None


def upgrade():
    op.create_table('filter',
                    sa.Column('filter_hash', sa.String(), nullable=False),
                    sa.Column('family', sa.String()),
                    sa.Column('processing', sa.String()),
                    sa.Column('k', sa.Integer()),
                    sa.Column('n_qubits', sa.Integer()),
                    sa.Column('n_gates', sa.Integer()),
                    sa.Column('seed', sa.String()),
                    sa.Column('document', sa.Text()),
                    sa.Column('date', sa.DateTime(), server_default=sa.func.now()),
                    sa.PrimaryKeyConstraint('filter_hash'))

    op.create_table('preprocess',
                    sa.Column('id', sa.Integer(), nullable=False),
                    sa.Column('dataset', sa.String()),
                    sa.Column('levels', sa.Integer()),
                    sa.Column('variant', sa.String()),
                    sa.Column('k', sa.Integer()),
                    sa.Column('n_filters', sa.Integer()),
                    sa.Column('decode', sa.String()),
                    sa.Column('total_patches', sa.BigInteger()),
                    sa.Column('unique_patches', sa.BigInteger()),
                    sa.Column('evaluator_calls', sa.BigInteger()),
                    sa.Column('memo_hits', sa.BigInteger()),
                    sa.Column('wall_time', sa.Float()),
                    sa.Column('features', sa.String()),
                    sa.Column('date', sa.DateTime(), server_default=sa.func.now()),
                    sa.PrimaryKeyConstraint('id'))

    op.create_table('expressibility',
                    sa.Column('id', sa.Integer(), nullable=False),
                    sa.Column('family', sa.String()),
                    sa.Column('k', sa.Integer()),
                    sa.Column('n_qubits', sa.Integer()),
                    sa.Column('alpha', sa.String()),
                    sa.Column('grid', sa.String()),
                    sa.Column('value', sa.Float()),
                    sa.Column('repeats', sa.Integer()),
                    sa.Column('pairs', sa.Integer()),
                    sa.Column('mean_expr_prime', sa.Float()),
                    sa.Column('std_expr_prime', sa.Float()),
                    sa.Column('date', sa.DateTime(), server_default=sa.func.now()),
                    sa.PrimaryKeyConstraint('id'))

    op.create_table('training',
                    sa.Column('id', sa.Integer(), nullable=False),
                    sa.Column('model_path', sa.String()),
                    sa.Column('seed', sa.String()),
                    sa.Column('epochs', sa.Integer()),
                    sa.Column('final_loss', sa.Float()),
                    sa.Column('accuracy', sa.Float(), nullable=True),
                    sa.Column('date', sa.DateTime(), server_default=sa.func.now()),
                    sa.PrimaryKeyConstraint('id'))


def downgrade():
    op.drop_table('training')
    op.drop_table('expressibility')
    op.drop_table('preprocess')
    op.drop_table('filter')
