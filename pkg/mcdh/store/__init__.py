__all__ = ["DrawStore", "Transaction", "persist_draws", "load_draws", "Model", "StoreInfo", "Parameter", "Chain", "Draw", "Session", "Result"]

from .store import DrawStore, Transaction, persist_draws, load_draws
from .models import Model, StoreInfo, Parameter, Chain, Draw
from .session import Session, Result
