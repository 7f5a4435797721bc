"""
网格资源选择器 - 统一配置管理
所有配置集中管理，使用 .env 文件管理日志相关的环境变量
评分、调度、仿真参数固定在此处，保证命令输出不受环境影响
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# 加载 .env 文件中的环境变量
load_dotenv()

BASE_DIR = Path(__file__).resolve().parent

# ============ 日志配置 ============
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_FILE = os.getenv('LOG_FILE', '')  # 为空时不写日志文件

# ============ 安全因子配置 ============
# 自我保护能力(SPC)的七个安全因子，顺序即表格列顺序
SECURITY_FACTORS = ('as', 'avc', 'fc', 'am', 'bf', 'na', 'ips')

# 各安全因子的参考权重，仅在加权模式下使用
DEFAULT_WEIGHTS = {
    'as': 0.82,
    'avc': 0.85,
    'fc': 0.9,
    'am': 0.8,
    'bf': 0.7,
    'na': 0.6,
    'ips': 0.75
}

# ============ 反馈属性配置 ============
# 规范属性集；np2 对应参考反馈数据中重复出现的隐私列，na_auth 为节点授权
FEEDBACK_ATTRIBUTES = ('nc', 'ni', 'nt', 'np', 'np2', 'nu', 'nr', 'na_auth')

# 由GOM根据作业结果计算、覆盖用户上报值的属性
MEASURED_ATTRIBUTES = ('nr', 'nu')

# ============ GOM配置 ============
GOM_REFRESH_EVERY = 1        # 每k个事件刷新一次RW/RF
ADMIT_PROVISIONAL = False    # 冷启动节点默认不参与排名
UTILIZATION_WINDOW = 1       # 节点利用率窗口保留的任务数

# ============ 仿真配置 ============
SIM_TOTAL_JOBS = 1000
SIM_SEED = 42
SIM_ALPHA = 1.0
SIM_MODE = 'broker'
SIM_MODES = ('broker', 'round_robin')
SIM_CHECKPOINT_COUNT = 10
WORKLOAD_POWER_RANGE = (1.0, 10.0)
RNG_ALGORITHM = 'numpy.random.PCG64'

# ============ 数据文件配置 ============
FIXTURE_DIR = BASE_DIR / 'fixtures'
FIXTURE_DIGEST_FILE = FIXTURE_DIR / 'SHA256SUMS'
REFERENCE_NODES_FIXTURE = 'paper_nodes'
REFERENCE_TABLES_FIXTURE = 'paper_tables'
SNAPSHOT_DECIMALS = 4
DEFAULT_TPC = 100.0     # 数据文件未给出tpc时的节点总算力

# ============ 容差配置 ============
PRINTED_TOLERANCE = 5e-4   # 与三位小数的印刷值比较
RF_TOLERANCE = 1e-12

# ============ 退出码 ============
EXIT_OK = 0
EXIT_CHECK_FAILED = 1    # 复现结果与独立重算不一致
EXIT_INPUT_ERROR = 2
EXIT_NO_RESOURCE = 3
