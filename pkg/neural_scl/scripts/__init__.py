# 命令行子命令包初始化文件
