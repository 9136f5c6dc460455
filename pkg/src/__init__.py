from .task import *
from .configs import *
from .utils import print_progress, serialize, JsonEncoder
