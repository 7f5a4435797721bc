"""
自定义异常类
统一错误处理策略，命令行根据异常类型映射退出码
"""

class GridBrokerException(Exception):
    """资源选择器基础异常"""
    pass


class ValidationException(GridBrokerException):
    """数据验证异常（分值越界等）"""
    def __init__(self, message: str, field: str = None):
        super().__init__(message)
        self.field = field


class InvalidParameterException(GridBrokerException):
    """无效参数异常（公式的定义域错误）"""
    pass


class ConfigurationException(GridBrokerException):
    """配置异常（权重表与因子不匹配、仿真参数非法）"""
    pass


class RegistrationException(GridBrokerException):
    """节点注册异常"""
    pass


class NodeNotFoundException(GridBrokerException):
    """节点未找到异常"""
    pass


class ConsistencyException(GridBrokerException):
    """事件一致性异常（重复结果、节点不匹配、无调度的反馈）"""
    pass


class NoResourceException(GridBrokerException):
    """没有可调度的节点"""
    pass


class DataIOException(GridBrokerException):
    """文件读写异常"""
    def __init__(self, message: str, path=None):
        super().__init__(f"{path}: {message}" if path is not None else message)
        self.path = path


class FixtureParseException(DataIOException):
    """节点数据文件解析异常，带行号和字段名"""
    def __init__(self, message: str, path=None, line: int = None, field: str = None):
        location = message
        if line is not None:
            location = f"line {line}: {location}"
        if field is not None:
            location = f"{location} (field '{field}')"
        super().__init__(location, path)
        self.line = line
        self.field = field
