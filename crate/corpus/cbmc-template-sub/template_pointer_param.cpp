template <typename T>
T deref(T *p) {
  return *p;
}
int main() {
  int *p = new int(3);
  int a = deref(p);
  delete p;
  int b = deref(p);
  return 0;
}
